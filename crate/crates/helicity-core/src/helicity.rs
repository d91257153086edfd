//! Curl eigenbasis, helicity spectral projections, fractional powers of |C|,
//! and the H_{1/2} / H_{-1/2} / Bargmann-Wigner norms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{
    divergence, inverse_transform, l2_norm, scalar_l2_inner, spectral_transform, SpectralField,
    VectorField,
};
use crate::grid::TorusGrid;

/// Deterministic real orthonormal frame (e1, e2) of the plane orthogonal to k,
/// with (k_hat, e1, e2) right-handed. e1 is built from the coordinate axis
/// least aligned with k (ties broken by axis index), then Gram-Schmidt.
/// Returns None for k = 0.
pub fn basis_vectors(k: [f64; 3]) -> Option<([f64; 3], [f64; 3])> {
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if kn == 0.0 {
        return None;
    }
    let khat = [k[0] / kn, k[1] / kn, k[2] / kn];
    let mut axis = 0;
    for i in 1..3 {
        if khat[i].abs() < khat[axis].abs() {
            axis = i;
        }
    }
    let mut e1 = [0.0; 3];
    e1[axis] = 1.0;
    let dot = khat[axis];
    for i in 0..3 {
        e1[i] -= dot * khat[i];
    }
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for v in &mut e1 {
        *v /= norm;
    }
    let e2 = [
        khat[1] * e1[2] - khat[2] * e1[1],
        khat[2] * e1[0] - khat[0] * e1[2],
        khat[0] * e1[1] - khat[1] * e1[0],
    ];
    Some((e1, e2))
}

/// Helicity eigenvector e_sign(k) = (e1 + sign*i*e2)/sqrt(2), satisfying
/// C_k e_sign = sign*|k|*e_sign.
pub fn eigenvector(k: [f64; 3], sign: i32) -> Option<[Complex64; 3]> {
    let (e1, e2) = basis_vectors(k)?;
    let s = sign.signum() as f64;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Some(std::array::from_fn(|i| {
        Complex64::new(e1[i] * r, s * e2[i] * r)
    }))
}

/// Immutable per-grid basis handle (vectors are computed on demand; the
/// construction is deterministic, so nothing needs to be stored).
#[derive(Clone, Copy, Debug)]
pub struct HelicityBasis {
    grid: TorusGrid,
}

impl HelicityBasis {
    pub fn new(grid: TorusGrid) -> Self {
        HelicityBasis { grid }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn eigenvector(&self, idx: (usize, usize, usize), sign: i32) -> Option<[Complex64; 3]> {
        eigenvector(self.grid.wavevector_deriv(idx), sign)
    }
}

fn project_modes(spec: &SpectralField, sign: i32) -> SpectralField {
    let grid = spec.grid();
    spec.map_modes(|idx, a| {
        let k = grid.wavevector_deriv(idx);
        match eigenvector(k, sign) {
            None => [Complex64::default(); 3],
            Some(e) => {
                // complex projection <e, a> e with <x,y> = sum conj(x)*y
                let c: Complex64 = (0..3).map(|i| e[i].conj() * a[i]).sum();
                std::array::from_fn(|i| c * e[i])
            }
        }
    })
}

/// Mode-wise orthogonal projection onto the sign-helicity subspace.
/// The k = 0 mode is dropped (fields are assumed zero-mean).
pub fn helicity_project(field: &VectorField, sign: i32) -> VectorField {
    inverse_transform(&project_modes(&spectral_transform(field), sign))
}

pub fn helicity_project_spec(spec: &SpectralField, sign: i32) -> SpectralField {
    project_modes(spec, sign)
}

/// |C|^exponent as the Fourier multiplier |k|^exponent on transverse
/// coefficients. Rejects nonzero mean content when the exponent is negative.
pub fn fractional_curl_power(field: &VectorField, exponent: f64) -> Result<VectorField> {
    let spec = spectral_transform(field);
    if exponent < 0.0 {
        let scale = spec.parseval_norm_sq().sqrt().max(1e-300);
        let vol = field.grid().length().powi(3).sqrt();
        if vol * spec.mean_mode_norm() > 1e-12 * scale {
            return Err(Error::InvalidArgument(
                "|C|^p with p < 0 undefined on the k = 0 mode; remove the mean first".into(),
            ));
        }
    }
    let trans = spec.transverse_project();
    Ok(inverse_transform(&trans.wavenumber_power(exponent)))
}

/// ||f||_{H_s}^2 = || |C|^{s} f ||_{L2}^2 computed directly in mode space.
pub fn h_norm_sq(field: &VectorField, s: f64) -> f64 {
    let spec = spectral_transform(field);
    let grid = field.grid();
    let n = grid.n();
    let vol = grid.length().powi(3);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = (i, j, l);
                let kn = grid.wavenumber(idx);
                if kn == 0.0 {
                    continue;
                }
                let e: f64 = spec.at(idx).iter().map(|z| z.norm_sqr()).sum();
                sum += kn.powf(2.0 * s) * e;
            }
        }
    }
    vol * sum
}

fn check_transverse(f: &VectorField, what: &str) -> Result<()> {
    let d = divergence(f);
    let dn = scalar_l2_inner(f.grid(), &d, &d).sqrt();
    let scale = l2_norm(f) * f.grid().k_min();
    if dn > 1e-8 * scale.max(1e-300) {
        return Err(Error::InvalidArgument(format!(
            "{what} is not divergence-free: ||div|| = {dn:.3e} vs scale {scale:.3e}"
        )));
    }
    Ok(())
}

/// Bargmann-Wigner norm squared: ||B||_{H_{-1/2}}^2 + ||E||_{H_{-1/2}}^2.
pub fn bw_norm_sq(b: &VectorField, e: &VectorField) -> Result<f64> {
    b.grid().same_as(&e.grid())?;
    check_transverse(b, "B")?;
    check_transverse(e, "E")?;
    Ok(h_norm_sq(b, -0.5) + h_norm_sq(e, -0.5))
}

/// Direct double-sum quadrature of
/// `integral (B(x).B(y) + E(x).E(y)) / |x-y|^2 dx dy`
/// with minimum-image torus distance and the diagonal excluded. Returns the
/// *uncalibrated* value (unit constant); see `calibrate_integral_constant`.
pub fn bw_norm_integral_raw(b: &VectorField, e: &VectorField, n_cap: usize) -> Result<f64> {
    b.grid().same_as(&e.grid())?;
    let grid = b.grid();
    let n = grid.n();
    if n > n_cap {
        return Err(Error::InvalidArgument(format!(
            "grid n = {n} above the O(n^6) cap {n_cap}"
        )));
    }
    let h = grid.spacing();
    // kernel over displacements
    let mut kernel = vec![0.0f64; n * n * n];
    for di in 0..n {
        for dj in 0..n {
            for dl in 0..n {
                if di == 0 && dj == 0 && dl == 0 {
                    continue;
                }
                let w = [di, dj, dl]
                    .iter()
                    .map(|&d| {
                        let d = d.min(n - d) as f64 * h;
                        d * d
                    })
                    .sum::<f64>();
                kernel[(di * n + dj) * n + dl] = 1.0 / w;
            }
        }
    }
    // correlation sum_x F(x).F(x+d) for both fields
    let mut total = 0.0;
    for field in [b, e] {
        let comps: Vec<&[f64]> = (0..3)
            .map(|c| field.comp(c).as_slice().expect("standard layout"))
            .collect();
        for di in 0..n {
            for dj in 0..n {
                for dl in 0..n {
                    let w = kernel[(di * n + dj) * n + dl];
                    if w == 0.0 {
                        continue;
                    }
                    let mut corr = 0.0;
                    for i in 0..n {
                        let i2 = (i + di) % n;
                        for j in 0..n {
                            let j2 = (j + dj) % n;
                            let row = (i * n + j) * n;
                            let row2 = (i2 * n + j2) * n;
                            for l in 0..n {
                                let l2 = (l + dl) % n;
                                for comp in &comps {
                                    corr += comp[row + l] * comp[row2 + l2];
                                }
                            }
                        }
                    }
                    total += w * corr;
                }
            }
        }
    }
    Ok(total * grid.cell_volume() * grid.cell_volume())
}

/// Least-squares constant c minimizing sum (bw_i - c * raw_i)^2 over a family
/// of states; the continuum constant is not asserted, only calibrated.
pub fn calibrate_integral_constant(pairs: &[(f64, f64)]) -> f64 {
    // pairs of (spectral bw_norm_sq, raw integral value)
    let num: f64 = pairs.iter().map(|(s, r)| s * r).sum();
    let den: f64 = pairs.iter().map(|(_, r)| r * r).sum();
    num / den
}
