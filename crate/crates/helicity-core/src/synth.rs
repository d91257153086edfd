//! Seeded synthesis of test fields.

use ndarray::Array3;
use num_complex::Complex64;
use rand::Rng;

use crate::field::{
    inverse_transform, spectral_transform, transverse_project, SpectralField, VectorField,
};
use crate::grid::TorusGrid;

fn randn<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; good enough for test-field synthesis.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_scalar<R: Rng>(grid: TorusGrid, rng: &mut R) -> Array3<f64> {
    let n = grid.n();
    Array3::from_shape_fn((n, n, n), |_| randn(rng))
}

/// Unit-variance white random field (all modes populated).
pub fn random_vector_field<R: Rng>(grid: TorusGrid, rng: &mut R) -> VectorField {
    let mut f = VectorField::zeros(grid);
    for c in 0..3 {
        *f.comp_mut(c) = random_scalar(grid, rng);
    }
    f
}

/// Zero out every mode whose integer index exceeds `mmax` on any axis.
pub fn band_limit(field: &VectorField, mmax: i64) -> VectorField {
    let spec = spectral_transform(field);
    let grid = field.grid();
    let filtered = spec.map_modes(|idx, a| {
        let keep = grid.mode(idx.0).abs() <= mmax
            && grid.mode(idx.1).abs() <= mmax
            && grid.mode(idx.2).abs() <= mmax;
        if keep {
            a
        } else {
            [Complex64::default(); 3]
        }
    });
    inverse_transform(&filtered)
}

/// Smooth random field: band-limited to `mmax`, zero mean.
pub fn random_band_limited<R: Rng>(grid: TorusGrid, mmax: i64, rng: &mut R) -> VectorField {
    let mut f = band_limit(&random_vector_field(grid, rng), mmax);
    let spec = spectral_transform(&f);
    let mean = spec.at((0, 0, 0));
    for c in 0..3 {
        let m = mean[c].re;
        f.comp_mut(c).mapv_inplace(|v| v - m);
    }
    f
}

/// Smooth random transverse zero-mean field.
pub fn random_transverse<R: Rng>(grid: TorusGrid, mmax: i64, rng: &mut R) -> VectorField {
    transverse_project(&random_band_limited(grid, mmax, rng))
}

/// Random transverse spectral amplitudes a(k) supported on `0 < |m_axis| <= mmax`,
/// *not* Hermitian-symmetrized: this is the complex mode function a(k) of the
/// plane-wave decomposition, one independent C^3 (transverse) value per k.
pub fn random_mode_function<R: Rng>(grid: TorusGrid, mmax: i64, rng: &mut R) -> SpectralField {
    let n = grid.n();
    let mut out = SpectralField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = (i, j, l);
                let m = [grid.mode(i), grid.mode(j), grid.mode(l)];
                if m.iter().all(|v| *v == 0) || m.iter().any(|v| v.abs() > mmax) {
                    continue;
                }
                let v: [Complex64; 3] =
                    std::array::from_fn(|_| Complex64::new(randn(rng), randn(rng)));
                out.set(idx, v);
            }
        }
    }
    out.transverse_project()
}
