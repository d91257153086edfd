//! Real 3-component fields on the torus and their spectral images, with the
//! exterior-calculus operators (curl, div, transverse projection) realized as
//! Fourier multipliers.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fft3, TorusGrid};

#[derive(Clone, Debug)]
pub struct VectorField {
    grid: TorusGrid,
    comps: [Array3<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let n = grid.n();
        VectorField {
            grid,
            comps: std::array::from_fn(|_| Array3::zeros((n, n, n))),
        }
    }

    pub fn from_components(grid: TorusGrid, comps: [Array3<f64>; 3]) -> Result<Self> {
        let n = grid.n();
        for c in &comps {
            if c.shape() != [n, n, n] {
                return Err(Error::GridMismatch(format!(
                    "component shape {:?} vs grid n = {n}",
                    c.shape()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite field value".into()));
            }
        }
        Ok(VectorField { grid, comps })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn comp(&self, i: usize) -> &Array3<f64> {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut Array3<f64> {
        &mut self.comps[i]
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        let mut out = self.clone();
        for a in &mut out.comps {
            a.mapv_inplace(|v| v * c);
        }
        out
    }

    pub fn add_scaled(&mut self, other: &VectorField, c: f64) {
        for (a, b) in self.comps.iter_mut().zip(other.comps.iter()) {
            a.zip_mut_with(b, |x, y| *x += c * y);
        }
    }

    pub fn plus(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }

    pub fn minus(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }
}

#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: [Array3<Complex64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let n = grid.n();
        SpectralField {
            grid,
            coeffs: std::array::from_fn(|_| Array3::zeros((n, n, n))),
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeff(&self, i: usize) -> &Array3<Complex64> {
        &self.coeffs[i]
    }

    pub fn coeff_mut(&mut self, i: usize) -> &mut Array3<Complex64> {
        &mut self.coeffs[i]
    }

    /// Coefficient 3-vector at one mode.
    pub fn at(&self, idx: (usize, usize, usize)) -> [Complex64; 3] {
        [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]]
    }

    pub fn set(&mut self, idx: (usize, usize, usize), v: [Complex64; 3]) {
        for i in 0..3 {
            self.coeffs[i][idx] = v[i];
        }
    }

    /// `L^3 * sum |coeff|^2` — equals the L2 norm squared of the real field.
    pub fn parseval_norm_sq(&self) -> f64 {
        let vol = self.grid.length().powi(3);
        let s: f64 = self
            .coeffs
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        vol * s
    }

    /// Largest deviation from Hermitian symmetry coeff(-k) = conj(coeff(k)).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let m = (
                        self.grid.neg_index(i),
                        self.grid.neg_index(j),
                        self.grid.neg_index(l),
                    );
                    for c in &self.coeffs {
                        let d = (c[(i, j, l)] - c[m].conj()).norm();
                        if d > worst {
                            worst = d;
                        }
                    }
                }
            }
        }
        worst
    }

    /// Apply a per-mode linear map `f(k_index, coeff) -> coeff`.
    pub fn map_modes<F>(&self, mut f: F) -> SpectralField
    where
        F: FnMut((usize, usize, usize), [Complex64; 3]) -> [Complex64; 3],
    {
        let mut out = self.clone();
        let n = self.grid.n();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = (i, j, l);
                    out.set(idx, f(idx, self.at(idx)));
                }
            }
        }
        out
    }

    pub fn curl(&self) -> SpectralField {
        let grid = self.grid;
        self.map_modes(|idx, a| {
            let k = grid.wavevector_deriv(idx);
            ck_apply(k, a)
        })
    }

    pub fn divergence(&self) -> Array3<Complex64> {
        let n = self.grid.n();
        let mut out = Array3::zeros((n, n, n));
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = (i, j, l);
                    let k = self.grid.wavevector_deriv(idx);
                    let a = self.at(idx);
                    let mut d = Complex64::default();
                    for c in 0..3 {
                        d += Complex64::new(0.0, k[c]) * a[c];
                    }
                    out[idx] = d;
                }
            }
        }
        out
    }

    /// Remove the component along k at every nonzero mode; k = 0 untouched.
    pub fn transverse_project(&self) -> SpectralField {
        let grid = self.grid;
        self.map_modes(|idx, a| {
            let k = grid.wavevector_deriv(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                return a;
            }
            let dot = a[0] * k[0] + a[1] * k[1] + a[2] * k[2];
            std::array::from_fn(|c| a[c] - dot * (k[c] / k2))
        })
    }

    /// Keep only the component along k at nonzero modes; k = 0 dropped.
    pub fn longitudinal_project(&self) -> SpectralField {
        let grid = self.grid;
        self.map_modes(|idx, a| {
            let k = grid.wavevector_deriv(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                return [Complex64::default(); 3];
            }
            let dot = a[0] * k[0] + a[1] * k[1] + a[2] * k[2];
            std::array::from_fn(|c| dot * (k[c] / k2))
        })
    }

    /// Multiply every nonzero mode by `|k|^p`; the k = 0 mode is zeroed.
    pub fn wavenumber_power(&self, p: f64) -> SpectralField {
        let grid = self.grid;
        self.map_modes(|idx, a| {
            let kn = grid.wavenumber(idx);
            if kn == 0.0 {
                return [Complex64::default(); 3];
            }
            let m = kn.powf(p);
            std::array::from_fn(|c| a[c] * m)
        })
    }

    pub fn mean_mode_norm(&self) -> f64 {
        self.at((0, 0, 0)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add_scaled(&mut self, other: &SpectralField, c: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            a.zip_mut_with(b, |x, y| *x += c * y);
        }
    }
}

/// The curl symbol: `C_k u = i k x u`.
pub fn ck_apply(k: [f64; 3], u: [Complex64; 3]) -> [Complex64; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        i * (k[1] * u[2] - k[2] * u[1]),
        i * (k[2] * u[0] - k[0] * u[2]),
        i * (k[0] * u[1] - k[1] * u[0]),
    ]
}

pub fn spectral_transform(field: &VectorField) -> SpectralField {
    let mut out = SpectralField::zeros(field.grid());
    for c in 0..3 {
        let mut buf: Array3<Complex64> = field.comp(c).mapv(|v| Complex64::new(v, 0.0));
        fft3(&mut buf, false);
        *out.coeff_mut(c) = buf;
    }
    out
}

pub fn inverse_transform(spec: &SpectralField) -> VectorField {
    let mut out = VectorField::zeros(spec.grid());
    for c in 0..3 {
        let mut buf = spec.coeff(c).clone();
        fft3(&mut buf, true);
        *out.comp_mut(c) = buf.mapv(|z| z.re);
    }
    out
}

pub fn curl(field: &VectorField) -> VectorField {
    inverse_transform(&spectral_transform(field).curl())
}

pub fn divergence(field: &VectorField) -> Array3<f64> {
    let spec = spectral_transform(field);
    let mut d = spec.divergence();
    fft3(&mut d, true);
    d.mapv(|z| z.re)
}

pub fn transverse_project(field: &VectorField) -> VectorField {
    inverse_transform(&spectral_transform(field).transverse_project())
}

/// (longitudinal-plus-mean part, transverse part).
pub fn longitudinal_split(field: &VectorField) -> (VectorField, VectorField) {
    let spec = spectral_transform(field);
    let trans = {
        let mut t = spec.transverse_project();
        t.set((0, 0, 0), [Complex64::default(); 3]);
        inverse_transform(&t)
    };
    let long = field.minus(&trans);
    (long, trans)
}

/// Exact lattice quadrature of `integral f . g dx` with uniform weight `L^3/n^3`.
pub fn l2_inner(f: &VectorField, g: &VectorField) -> Result<f64> {
    f.grid().same_as(&g.grid())?;
    let mut s = 0.0;
    for c in 0..3 {
        s += f
            .comp(c)
            .iter()
            .zip(g.comp(c).iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();
    }
    Ok(s * f.grid().cell_volume())
}

pub fn l2_norm(f: &VectorField) -> f64 {
    l2_inner(f, f).expect("same grid").sqrt()
}

/// Scalar-field lattice inner product with the same weight.
pub fn scalar_l2_inner(grid: TorusGrid, f: &Array3<f64>, g: &Array3<f64>) -> f64 {
    f.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume()
}
