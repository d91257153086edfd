//! Spectral calculus: transform conventions, derivative operators, projections.

use helicity_core::field::{
    curl, divergence, inverse_transform, l2_inner, l2_norm, longitudinal_split, scalar_l2_inner,
    spectral_transform, transverse_project, SpectralField, VectorField,
};
use helicity_core::grid::TorusGrid;
use helicity_core::synth;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid8() -> TorusGrid {
    TorusGrid::new(8, 2.0 * std::f64::consts::PI).unwrap()
}

#[test]
fn transform_roundtrip_and_parseval() {
    let grid = grid8();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = synth::random_vector_field(grid, &mut rng);
    let spec = spectral_transform(&f);
    let back = inverse_transform(&spec);
    let diff = f.minus(&back);
    assert!(l2_norm(&diff) < 1e-12 * l2_norm(&f));
    // Parseval: lattice quadrature equals the weighted coefficient sum
    let direct = l2_inner(&f, &f).unwrap();
    let spectral = spec.parseval_norm_sq();
    assert!((direct - spectral).abs() < 1e-12 * direct);
    // real field => Hermitian spectrum
    assert!(spec.hermitian_defect() < 1e-13 * direct.sqrt());
}

#[test]
fn constant_field_spectrum_at_zero_mode() {
    let grid = grid8();
    let mut f = VectorField::zeros(grid);
    f.comp_mut(0).fill(2.5);
    let spec = spectral_transform(&f);
    let n = grid.n();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let c = spec.at((i, j, l));
                if (i, j, l) == (0, 0, 0) {
                    assert!((c[0] - Complex64::new(2.5, 0.0)).norm() < 1e-13);
                } else {
                    assert!(c.iter().all(|z| z.norm() < 1e-13));
                }
            }
        }
    }
}

#[test]
fn cosine_has_conjugate_mode_pair() {
    let grid = grid8();
    let n = grid.n();
    let mut f = VectorField::zeros(grid);
    for i in 0..n {
        let x = grid.point((i, 0, 0))[0];
        let v = (2.0 * std::f64::consts::PI * x / grid.length()).cos();
        for j in 0..n {
            for l in 0..n {
                f.comp_mut(0)[(i, j, l)] = v;
            }
        }
    }
    let spec = spectral_transform(&f);
    let plus = spec.at((1, 0, 0));
    let minus = spec.at((n - 1, 0, 0));
    assert!((plus[0] - Complex64::new(0.5, 0.0)).norm() < 1e-13);
    assert!((minus[0] - plus[0].conj()).norm() < 1e-14);
    // every other mode empty
    let total: f64 = spec.parseval_norm_sq();
    let pair = grid.length().powi(3) * (plus[0].norm_sqr() + minus[0].norm_sqr());
    assert!((total - pair).abs() < 1e-12 * total);
}

#[test]
fn spectral_derivative_is_exact_for_band_limited_fields() {
    let grid = grid8();
    let n = grid.n();
    let kw = 3.0 * grid.k_min();
    let mut f = VectorField::zeros(grid);
    for i in 0..n {
        let x = grid.point((i, 0, 0))[0];
        for j in 0..n {
            for l in 0..n {
                f.comp_mut(2)[(i, j, l)] = (kw * x).sin();
            }
        }
    }
    // curl (0, 0, w(x1)) = (0, -dw/dx1, 0)
    let c = curl(&f);
    for i in 0..n {
        let x = grid.point((i, 0, 0))[0];
        let expect = -kw * (kw * x).cos();
        assert!((c.comp(1)[(i, 3, 5)] - expect).abs() < 1e-12 * kw);
        assert!(c.comp(0)[(i, 3, 5)].abs() < 1e-13 * kw);
        assert!(c.comp(2)[(i, 3, 5)].abs() < 1e-13 * kw);
    }
}

#[test]
fn curl_of_constant_and_gradient_vanishes() {
    let grid = grid8();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut c = VectorField::zeros(grid);
    c.comp_mut(0).fill(1.0);
    c.comp_mut(2).fill(-3.0);
    assert!(l2_norm(&curl(&c)) < 1e-13);
    // longitudinal (gradient) part of a random smooth field
    let f = synth::random_band_limited(grid, 2, &mut rng);
    let (long, _) = longitudinal_split(&f);
    assert!(l2_norm(&curl(&long)) < 1e-11 * l2_norm(&f) * grid.k_min());
}

#[test]
fn transverse_projection_properties() {
    let grid = grid8();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = synth::random_vector_field(grid, &mut rng);
    let t = transverse_project(&f);
    // divergence-free
    let d = divergence(&t);
    let dn = scalar_l2_inner(grid, &d, &d).sqrt();
    assert!(dn < 1e-12 * l2_norm(&f) * grid.k_min());
    // idempotent
    let tt = transverse_project(&t);
    assert!(l2_norm(&tt.minus(&t)) < 1e-12 * l2_norm(&f));
    // split is orthogonal and sums back
    let (long, trans) = longitudinal_split(&f);
    assert!(l2_norm(&long.plus(&trans).minus(&f)) < 1e-12 * l2_norm(&f));
    assert!(l2_inner(&long, &trans).unwrap().abs() < 1e-11 * l2_norm(&f).powi(2));
    // pure gradient is annihilated
    let (grad, _) = longitudinal_split(&synth::random_band_limited(grid, 2, &mut rng));
    let killed = {
        // remove the mean before projecting: transverse_project keeps k = 0
        let (l2, t2) = longitudinal_split(&grad);
        let _ = l2;
        t2
    };
    assert!(l2_norm(&killed) < 1e-12 * l2_norm(&f).max(1.0));
}

#[test]
fn operator_identities_on_random_fields() {
    let grid = grid8();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let f = synth::random_transverse(grid, 3, &mut rng);
    let g = synth::random_vector_field(grid, &mut rng);
    // curl is symmetric
    let lhs = l2_inner(&curl(&f), &g).unwrap();
    let rhs = l2_inner(&f, &curl(&g)).unwrap();
    assert!((lhs - rhs).abs() < 1e-12 * l2_norm(&f) * l2_norm(&g) * grid.k_min());
    // div curl = 0
    let dc = divergence(&curl(&g));
    assert!(scalar_l2_inner(grid, &dc, &dc).sqrt() < 1e-11 * l2_norm(&g) * grid.k_min().powi(2));
    // curl curl = -Laplacian on transverse fields (spectral |k|^2 multiplier)
    let cc = curl(&curl(&f));
    let spec = spectral_transform(&f);
    let lap = inverse_transform(&spec.map_modes(|idx, a| {
        let kn = grid.wavenumber(idx);
        std::array::from_fn(|c| a[c] * kn * kn)
    }));
    let scale = l2_norm(&lap);
    assert!(l2_norm(&cc.minus(&lap)) < 1e-10 * scale);
}

#[test]
fn mode_orthogonality_in_quadrature() {
    let grid = grid8();
    let n = grid.n();
    let mk = |idx: (usize, usize, usize), comp: usize| -> VectorField {
        let mut s = SpectralField::zeros(grid);
        let mut v = [Complex64::default(); 3];
        v[comp] = Complex64::new(0.5, 0.0);
        s.set(idx, v);
        let neg = (
            grid.neg_index(idx.0),
            grid.neg_index(idx.1),
            grid.neg_index(idx.2),
        );
        s.set(neg, v);
        inverse_transform(&s)
    };
    let f = mk((1, 0, 0), 1);
    let g = mk((0, 2, 0), 1);
    assert!(l2_inner(&f, &g).unwrap().abs() < 1e-13);
    assert!(l2_inner(&f, &f).unwrap() > 0.0);
    let _ = n;
}
