//! su(2)-valued differential forms on the torus and their lattice calculus.
//!
//! Degrees 0..3 are supported; 2-forms and 3-forms are stored through their
//! Hodge duals (a vector and a scalar respectively), which is an isometry, so
//! d on 1-forms is a curl per Lie coefficient, d on 2-forms a divergence, and
//! the wedge/hook brackets become cross/dot products of su(2) coefficients.

use ndarray::Array3;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::{fft3, TorusGrid};
use crate::su2::{self, Quat, Su2};
use crate::synth;

fn ncomp_for(degree: usize) -> Result<usize> {
    match degree {
        0 | 3 => Ok(1),
        1 | 2 => Ok(3),
        _ => Err(Error::Degree(format!("degree {degree} out of range 0..=3"))),
    }
}

#[derive(Clone, Debug)]
pub struct LieField {
    grid: TorusGrid,
    degree: usize,
    /// comps[spatial-or-dual component][lie index]
    comps: Vec<[Array3<f64>; 3]>,
}

impl LieField {
    pub fn zeros(grid: TorusGrid, degree: usize) -> Result<Self> {
        let nc = ncomp_for(degree)?;
        let n = grid.n();
        Ok(LieField {
            grid,
            degree,
            comps: (0..nc)
                .map(|_| std::array::from_fn(|_| Array3::zeros((n, n, n))))
                .collect(),
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, c: usize, a: usize) -> &Array3<f64> {
        &self.comps[c][a]
    }

    pub fn comp_mut(&mut self, c: usize, a: usize) -> &mut Array3<f64> {
        &mut self.comps[c][a]
    }

    /// su(2) value of component `c` at a flat storage offset.
    #[inline]
    pub fn value_at(&self, c: usize, offset: usize) -> Su2 {
        std::array::from_fn(|a| self.comps[c][a].as_slice().unwrap()[offset])
    }

    pub fn add_scaled(&mut self, other: &LieField, f: f64) {
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        for (c, oc) in self.comps.iter_mut().zip(other.comps.iter()) {
            for (x, y) in c.iter_mut().zip(oc.iter()) {
                x.zip_mut_with(y, |u, v| *u += f * v);
            }
        }
    }

    pub fn scaled(&self, f: f64) -> LieField {
        let mut out = self.clone();
        for c in &mut out.comps {
            for x in c.iter_mut() {
                x.mapv_inplace(|v| v * f);
            }
        }
        out
    }

    pub fn plus(&self, other: &LieField) -> LieField {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }

    pub fn minus(&self, other: &LieField) -> LieField {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    /// Embed a real field along one Lie direction (degree 1).
    pub fn from_abelian(v: &VectorField, lie_dir: usize) -> LieField {
        let mut out = LieField::zeros(v.grid(), 1).unwrap();
        for c in 0..3 {
            out.comps[c][lie_dir] = v.comp(c).clone();
        }
        out
    }

    /// Extract one Lie direction of a 3-component field.
    pub fn abelian_component(&self, lie_dir: usize) -> VectorField {
        assert_eq!(self.ncomp(), 3);
        VectorField::from_components(
            self.grid,
            std::array::from_fn(|c| self.comps[c][lie_dir].clone()),
        )
        .unwrap()
    }

    /// View the Lie index `a` as a real 3-component field (degree 1 or 2).
    pub fn lie_slice(&self, a: usize) -> VectorField {
        assert_eq!(self.ncomp(), 3);
        VectorField::from_components(
            self.grid,
            std::array::from_fn(|c| self.comps[c][a].clone()),
        )
        .unwrap()
    }

    pub fn set_lie_slice(&mut self, a: usize, v: &VectorField) {
        assert_eq!(self.ncomp(), 3);
        for c in 0..3 {
            self.comps[c][a] = v.comp(c).clone();
        }
    }
}

pub fn l2_inner(u: &LieField, v: &LieField) -> Result<f64> {
    u.grid.same_as(&v.grid)?;
    if u.degree != v.degree {
        return Err(Error::Degree(format!(
            "inner product of degrees {} and {}",
            u.degree, v.degree
        )));
    }
    let mut s = 0.0;
    for (c, oc) in u.comps.iter().zip(v.comps.iter()) {
        for (x, y) in c.iter().zip(oc.iter()) {
            s += x.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok(s * u.grid.cell_volume())
}

pub fn l2_norm(u: &LieField) -> f64 {
    l2_inner(u, u).unwrap().sqrt()
}

// ---------- scalar spectral helpers ----------

fn scalar_fft(f: &Array3<f64>) -> Array3<Complex64> {
    let mut buf = f.mapv(|v| Complex64::new(v, 0.0));
    fft3(&mut buf, false);
    buf
}

fn scalar_ifft(mut f: Array3<Complex64>) -> Array3<f64> {
    fft3(&mut f, true);
    f.mapv(|z| z.re)
}

fn scalar_gradient(grid: TorusGrid, f: &Array3<f64>) -> [Array3<f64>; 3] {
    let spec = scalar_fft(f);
    let n = grid.n();
    std::array::from_fn(|c| {
        let mut g: Array3<Complex64> = Array3::zeros((n, n, n));
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let k = grid.wavevector_deriv((i, j, l));
                    g[(i, j, l)] = Complex64::new(0.0, k[c]) * spec[(i, j, l)];
                }
            }
        }
        scalar_ifft(g)
    })
}

fn vector_curl(grid: TorusGrid, comps: &[Array3<f64>; 3]) -> [Array3<f64>; 3] {
    let v = VectorField::from_components(grid, comps.clone()).unwrap();
    let c = crate::field::curl(&v);
    std::array::from_fn(|i| c.comp(i).clone())
}

fn vector_div(grid: TorusGrid, comps: &[Array3<f64>; 3]) -> Array3<f64> {
    let v = VectorField::from_components(grid, comps.clone()).unwrap();
    crate::field::divergence(&v)
}

// ---------- exterior derivative and its adjoint ----------

/// Spectral exterior derivative.
pub fn d(f: &LieField) -> Result<LieField> {
    let grid = f.grid;
    match f.degree {
        0 => {
            let mut out = LieField::zeros(grid, 1)?;
            for a in 0..3 {
                let g = scalar_gradient(grid, &f.comps[0][a]);
                for c in 0..3 {
                    out.comps[c][a] = g[c].clone();
                }
            }
            Ok(out)
        }
        1 => {
            let mut out = LieField::zeros(grid, 2)?;
            for a in 0..3 {
                let c = vector_curl(grid, &lie_comps_transposed(f, a));
                for i in 0..3 {
                    out.comps[i][a] = c[i].clone();
                }
            }
            Ok(out)
        }
        2 => {
            let mut out = LieField::zeros(grid, 3)?;
            for a in 0..3 {
                out.comps[0][a] = vector_div(grid, &lie_comps_transposed(f, a));
            }
            Ok(out)
        }
        _ => Err(Error::Degree("d of a 3-form".into())),
    }
}

fn lie_comps_transposed(f: &LieField, a: usize) -> [Array3<f64>; 3] {
    std::array::from_fn(|c| f.comps[c][a].clone())
}

/// Exact lattice adjoint of `d`.
pub fn d_star(f: &LieField) -> Result<LieField> {
    let grid = f.grid;
    match f.degree {
        1 => {
            let mut out = LieField::zeros(grid, 0)?;
            for a in 0..3 {
                let div = vector_div(grid, &lie_comps_transposed(f, a));
                out.comps[0][a] = div.mapv(|v| -v);
            }
            Ok(out)
        }
        2 => {
            let mut out = LieField::zeros(grid, 1)?;
            for a in 0..3 {
                let c = vector_curl(grid, &lie_comps_transposed(f, a));
                for i in 0..3 {
                    out.comps[i][a] = c[i].clone();
                }
            }
            Ok(out)
        }
        3 => {
            let mut out = LieField::zeros(grid, 2)?;
            for a in 0..3 {
                let g = scalar_gradient(grid, &f.comps[0][a]);
                for c in 0..3 {
                    out.comps[c][a] = g[c].mapv(|v| -v);
                }
            }
            Ok(out)
        }
        _ => Err(Error::Degree("d* of a 0-form".into())),
    }
}

// ---------- pointwise brackets ----------

fn pointwise_binary<F>(u: &LieField, v: &LieField, out_degree: usize, f: F) -> LieField
where
    F: Fn(&LieField, &LieField, usize, &mut LieField),
{
    let mut out = LieField::zeros(u.grid, out_degree).unwrap();
    let npts = u.grid.points();
    f(u, v, npts, &mut out);
    out
}

/// (bracket-cross) two 3-component fields into a 3-component field:
/// out_i = sum_{jk} eps_{ijk} [u_j, v_k]. Symmetric in (u, v).
fn cross_into(u: &LieField, v: &LieField, npts: usize, out: &mut LieField) {
    for p in 0..npts {
        let uj: [Su2; 3] = std::array::from_fn(|c| u.value_at(c, p));
        let vk: [Su2; 3] = std::array::from_fn(|c| v.value_at(c, p));
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            let b1 = su2::bracket(uj[j], vk[k]);
            let b2 = su2::bracket(uj[k], vk[j]);
            for a in 0..3 {
                out.comps[i][a].as_slice_mut().unwrap()[p] = b1[a] - b2[a];
            }
        }
    }
}

/// sum_i [u_i, v_i] into a single su(2) scalar component.
fn dot_bracket_into(u: &LieField, v: &LieField, npts: usize, out: &mut LieField) {
    for p in 0..npts {
        let mut acc = [0.0; 3];
        for c in 0..3 {
            let b = su2::bracket(u.value_at(c, p), v.value_at(c, p));
            for a in 0..3 {
                acc[a] += b[a];
            }
        }
        for a in 0..3 {
            out.comps[0][a].as_slice_mut().unwrap()[p] = acc[a];
        }
    }
}

/// [lambda, w_c] per component, lambda a Lie scalar.
fn scalar_bracket_into(lam: &LieField, w: &LieField, npts: usize, out: &mut LieField) {
    for p in 0..npts {
        let l = lam.value_at(0, p);
        for c in 0..w.ncomp() {
            let b = su2::bracket(l, w.value_at(c, p));
            for a in 0..3 {
                out.comps[c][a].as_slice_mut().unwrap()[p] = b[a];
            }
        }
    }
}

/// Commutator wedge [u ^ v] with Hodge-dual storage.
pub fn bracket_wedge(u: &LieField, v: &LieField) -> Result<LieField> {
    u.grid.same_as(&v.grid)?;
    let (p, q) = (u.degree, v.degree);
    if p + q > 3 {
        return Err(Error::Degree(format!("wedge of degrees {p} and {q}")));
    }
    Ok(match (p, q) {
        (0, _) => pointwise_binary(u, v, q, scalar_bracket_into),
        (_, 0) => {
            let w = pointwise_binary(v, u, p, scalar_bracket_into);
            // [u ^ lambda]: [u_c, lambda] = -[lambda, u_c]
            w.scaled(-1.0)
        }
        (1, 1) => pointwise_binary(u, v, 2, cross_into),
        (1, 2) => pointwise_binary(u, v, 3, dot_bracket_into),
        (2, 1) => pointwise_binary(u, v, 3, dot_bracket_into),
        _ => {
            return Err(Error::Degree(format!(
                "wedge of degrees {p} and {q} not supported"
            )))
        }
    })
}

/// The hook [u -| v], the pointwise adjoint of the wedge:
/// <[u -| v], w> = <v, [u ^ w]> for all w.
pub fn bracket_hook(u: &LieField, v: &LieField) -> Result<LieField> {
    u.grid.same_as(&v.grid)?;
    let (p, r) = (u.degree, v.degree);
    if r < p {
        return Err(Error::Degree(format!("hook of degree {p} into degree {r}")));
    }
    Ok(match (p, r) {
        (0, _) => {
            // [u -| v]_c = [v_c, u]
            let w = pointwise_binary(u, v, r, scalar_bracket_into);
            w.scaled(-1.0)
        }
        (1, 1) | (2, 2) => {
            // sum_c [v_c, u_c]
            pointwise_binary(v, u, 0, dot_bracket_into)
        }
        (1, 2) => {
            // symmetric bracket-cross
            pointwise_binary(u, v, 1, cross_into)
        }
        _ => {
            return Err(Error::Degree(format!(
                "hook of degrees {p} and {r} not supported"
            )))
        }
    })
}

// ---------- covariant operators ----------

/// d_A w = d w + [A ^ w].
pub fn covariant_d(conn: &LieField, w: &LieField) -> Result<LieField> {
    assert_eq!(conn.degree, 1);
    let mut out = d(w)?;
    out.add_scaled(&bracket_wedge(conn, w)?, 1.0);
    Ok(out)
}

/// Exact lattice adjoint of d_A.
pub fn covariant_d_star(conn: &LieField, w: &LieField) -> Result<LieField> {
    assert_eq!(conn.degree, 1);
    let grid = conn.grid;
    match w.degree {
        1 => {
            // -div w - sum_c [A_c, w_c]
            let mut out = d_star(w)?;
            let br = pointwise_binary(conn, w, 0, dot_bracket_into);
            out.add_scaled(&br, -1.0);
            Ok(out)
        }
        2 => {
            // curl w + bracket-cross(A, w): the same kernel as d_A on 1-forms
            let mut out = d_star(w)?;
            out.add_scaled(&pointwise_binary(conn, w, 1, cross_into), 1.0);
            Ok(out)
        }
        3 => {
            // -grad f - [A_c, f]
            let mut out = d_star(w)?;
            let mut br = LieField::zeros(grid, 2)?;
            let npts = grid.points();
            for p in 0..npts {
                let f = w.value_at(0, p);
                for c in 0..3 {
                    let b = su2::bracket(conn.value_at(c, p), f);
                    for a in 0..3 {
                        br.comps[c][a].as_slice_mut().unwrap()[p] = b[a];
                    }
                }
            }
            out.add_scaled(&br, -1.0);
            Ok(out)
        }
        _ => Err(Error::Degree("d_A* of a 0-form".into())),
    }
}

/// Curvature b = da + a ^ a = da + (1/2)[a ^ a] (dual storage).
pub fn curvature3(a: &LieField) -> Result<LieField> {
    assert_eq!(a.degree, 1);
    let mut b = d(a)?;
    b.add_scaled(&bracket_wedge(a, a)?, 0.5);
    Ok(b)
}

/// 2/3-rule spectral filter: zero every mode with an index above n/3 on any axis.
pub fn dealias(f: &LieField) -> LieField {
    let grid = f.grid;
    let cutoff = (grid.n() / 3) as i64;
    let mut out = f.clone();
    for comp in &mut out.comps {
        for arr in comp.iter_mut() {
            let mut spec = scalar_fft(arr);
            let n = grid.n();
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let keep = grid.mode(i).abs() <= cutoff
                            && grid.mode(j).abs() <= cutoff
                            && grid.mode(l).abs() <= cutoff;
                        if !keep {
                            spec[(i, j, l)] = Complex64::default();
                        }
                    }
                }
            }
            *arr = scalar_ifft(spec);
        }
    }
    out
}

/// Seeded band-limited random Lie field with unit-scale coefficients.
pub fn random_lie_field<R: Rng>(
    grid: TorusGrid,
    degree: usize,
    mmax: i64,
    rng: &mut R,
) -> LieField {
    let mut out = LieField::zeros(grid, degree).unwrap();
    let nc = out.ncomp();
    for c in 0..nc {
        for a in 0..3 {
            let f = synth::random_band_limited(grid, mmax, rng);
            out.comps[c][a] = f.comp(0).clone();
        }
    }
    out
}

// ---------- gauge functions ----------

#[derive(Clone, Debug)]
pub struct GaugeFunction {
    grid: TorusGrid,
    q: [Array3<f64>; 4],
}

impl GaugeFunction {
    pub fn identity(grid: TorusGrid) -> Self {
        let n = grid.n();
        let mut q: [Array3<f64>; 4] = std::array::from_fn(|_| Array3::zeros((n, n, n)));
        q[0].fill(1.0);
        GaugeFunction { grid, q }
    }

    /// g = exp(lambda) for a Lie-scalar lambda.
    pub fn from_algebra(lambda: &LieField) -> Result<Self> {
        if lambda.degree() != 0 {
            return Err(Error::Degree("gauge generator must be a 0-form".into()));
        }
        let grid = lambda.grid();
        let mut g = GaugeFunction::identity(grid);
        let npts = grid.points();
        for p in 0..npts {
            let x = lambda.value_at(0, p);
            let q = su2::qexp_pure([0.5 * x[0], 0.5 * x[1], 0.5 * x[2]]);
            for c in 0..4 {
                g.q[c].as_slice_mut().unwrap()[p] = q[c];
            }
        }
        Ok(g)
    }

    /// Smooth random gauge function, band-limited generator of given amplitude.
    pub fn random<R: Rng>(grid: TorusGrid, mmax: i64, amplitude: f64, rng: &mut R) -> Self {
        let lam = random_lie_field(grid, 0, mmax, rng).scaled(amplitude);
        GaugeFunction::from_algebra(&lam).unwrap()
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn quat_at(&self, offset: usize) -> Quat {
        std::array::from_fn(|c| self.q[c].as_slice().unwrap()[offset])
    }

    pub fn unitarity_defect(&self) -> f64 {
        let npts = self.grid.points();
        let mut worst = 0.0f64;
        for p in 0..npts {
            let d = (su2::qnorm(self.quat_at(p)) - 1.0).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn inverse(&self) -> GaugeFunction {
        let mut out = self.clone();
        for c in 1..4 {
            out.q[c].mapv_inplace(|v| -v);
        }
        out
    }

    pub fn compose(&self, other: &GaugeFunction) -> GaugeFunction {
        let mut out = self.clone();
        let npts = self.grid.points();
        for p in 0..npts {
            let q = su2::qmul(self.quat_at(p), other.quat_at(p));
            for c in 0..4 {
                out.q[c].as_slice_mut().unwrap()[p] = q[c];
            }
        }
        out
    }

    /// Maurer-Cartan form g^{-1} dg as a Lie 1-form (spectral derivatives of
    /// the quaternion components; the scalar part is discarded, it vanishes
    /// identically for unit quaternions).
    pub fn maurer_cartan(&self) -> LieField {
        let grid = self.grid;
        let grads: Vec<[Array3<f64>; 3]> =
            (0..4).map(|c| scalar_gradient(grid, &self.q[c])).collect();
        let mut out = LieField::zeros(grid, 1).unwrap();
        let npts = grid.points();
        for p in 0..npts {
            let q = self.quat_at(p);
            for c in 0..3 {
                let dq: Quat = std::array::from_fn(|w| grads[w][c].as_slice().unwrap()[p]);
                let mc = su2::qmul(su2::qconj(q), dq);
                let lie = su2::lie_of_pure_quat(mc);
                for a in 0..3 {
                    out.comps[c][a].as_slice_mut().unwrap()[p] = lie[a];
                }
            }
        }
        out
    }

    /// g^{-1} X g componentwise (any degree).
    pub fn conjugate(&self, x: &LieField) -> LieField {
        let mut out = x.clone();
        let npts = self.grid.points();
        for p in 0..npts {
            let q = self.quat_at(p);
            for c in 0..x.ncomp() {
                let v = su2::ad_inverse(q, x.value_at(c, p));
                for a in 0..3 {
                    out.comps[c][a].as_slice_mut().unwrap()[p] = v[a];
                }
            }
        }
        out
    }
}

/// A^g = g^{-1} A g + g^{-1} dg for a connection (degree-1) field.
pub fn gauge_transform(a: &LieField, g: &GaugeFunction) -> Result<LieField> {
    a.grid().same_as(&g.grid())?;
    if a.degree() != 1 {
        return Err(Error::Degree("gauge_transform expects a 1-form".into()));
    }
    if g.unitarity_defect() > 1e-10 {
        return Err(Error::InvalidArgument("gauge function not unitary".into()));
    }
    let mut out = g.conjugate(a);
    out.add_scaled(&g.maurer_cartan(), 1.0);
    Ok(out)
}
