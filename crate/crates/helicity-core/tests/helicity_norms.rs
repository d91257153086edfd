//! Curl eigenbasis, helicity projections, fractional powers, and the norms
//! built on them.

use helicity_core::field::{
    ck_apply, inverse_transform, l2_inner, l2_norm, spectral_transform, SpectralField,
};
use helicity_core::grid::TorusGrid;
use helicity_core::helicity::{
    basis_vectors, bw_norm_integral_raw, bw_norm_sq, calibrate_integral_constant, eigenvector,
    fractional_curl_power, h_norm_sq, helicity_project, HelicityBasis,
};
use helicity_core::maxwell::MaxwellState;
use helicity_core::synth;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, 2.0 * std::f64::consts::PI).unwrap()
}

fn cdot(x: &[Complex64; 3], y: &[Complex64; 3]) -> Complex64 {
    (0..3).map(|i| x[i].conj() * y[i]).sum()
}

fn cross_ik(k: [f64; 3], v: &[Complex64; 3]) -> [Complex64; 3] {
    // C_k v = i k x v
    let i = Complex64::new(0.0, 1.0);
    [
        i * (Complex64::new(k[1], 0.0) * v[2] - Complex64::new(k[2], 0.0) * v[1]),
        i * (Complex64::new(k[2], 0.0) * v[0] - Complex64::new(k[0], 0.0) * v[2]),
        i * (Complex64::new(k[0], 0.0) * v[1] - Complex64::new(k[1], 0.0) * v[0]),
    ]
}

#[test]
fn frame_is_orthonormal_and_right_handed() {
    let samples = [
        [1.0, 0.0, 0.0],
        [0.0, -2.0, 0.0],
        [1.0, 1.0, 1.0],
        [3.0, -1.0, 2.0],
        [-0.3, 0.7, -5.0],
    ];
    for k in samples {
        let (e1, e2) = basis_vectors(k).unwrap();
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let khat = [k[0] / kn, k[1] / kn, k[2] / kn];
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        assert!((dot(e1, e1) - 1.0).abs() < 1e-14);
        assert!((dot(e2, e2) - 1.0).abs() < 1e-14);
        assert!(dot(e1, e2).abs() < 1e-14);
        assert!(dot(khat, e1).abs() < 1e-14);
        assert!(dot(khat, e2).abs() < 1e-14);
        // right-handed: khat . (e1 x e2) = +1
        let cx = [
            e1[1] * e2[2] - e1[2] * e2[1],
            e1[2] * e2[0] - e1[0] * e2[2],
            e1[0] * e2[1] - e1[1] * e2[0],
        ];
        assert!((dot(khat, cx) - 1.0).abs() < 1e-13);
    }
    assert!(basis_vectors([0.0; 3]).is_none());
}

#[test]
fn eigenvectors_diagonalize_the_mode_curl() {
    let samples: [[f64; 3]; 4] =
        [[2.0, 0.0, 0.0], [1.0, -3.0, 2.0], [0.0, 0.0, 1.0], [5.0, 5.0, 5.0]];
    for k in samples {
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        for sign in [1, -1] {
            let e = eigenvector(k, sign).unwrap();
            // C_k e = sign |k| e
            let ce = cross_ik(k, &e);
            let want = sign as f64 * kn;
            for i in 0..3 {
                assert!((ce[i] - Complex64::new(want, 0.0) * e[i]).norm() < 1e-13 * kn);
            }
            assert!((cdot(&e, &e).re - 1.0).abs() < 1e-14);
        }
        let ep = eigenvector(k, 1).unwrap();
        let em = eigenvector(k, -1).unwrap();
        assert!(cdot(&ep, &em).norm() < 1e-14);
        // conjugation swaps the helicity sign
        for i in 0..3 {
            assert!((ep[i].conj() - em[i]).norm() < 1e-15);
        }
    }
}

#[test]
fn basis_handle_is_deterministic() {
    let g = grid(8);
    let b1 = HelicityBasis::new(g);
    let b2 = HelicityBasis::new(g);
    for idx in [(1, 0, 0), (0, 3, 5), (7, 7, 1), (4, 2, 6)] {
        for sign in [1, -1] {
            let v1 = b1.eigenvector(idx, sign);
            let v2 = b2.eigenvector(idx, sign);
            match (v1, v2) {
                (Some(a), Some(b)) => {
                    for i in 0..3 {
                        assert_eq!(a[i], b[i]);
                    }
                }
                (None, None) => {}
                _ => panic!("inconsistent eigenvector availability"),
            }
        }
    }
    assert!(b1.eigenvector((0, 0, 0), 1).is_none());
}

#[test]
fn ck_apply_is_hermitian_and_squares_to_minus_laplacian() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u = spectral_transform(&synth::random_transverse(g, 3, &mut rng));
    let v = spectral_transform(&synth::random_transverse(g, 3, &mut rng));
    let apply_c = |x: &SpectralField| x.map_modes(|idx, a| ck_apply(g.wavevector(idx), a));
    let cu = apply_c(&u);
    let cv = apply_c(&v);
    // <C u, v> = <u, C v> in the weighted coefficient inner product
    let vol = g.length().powi(3);
    let inner = |x: &SpectralField, y: &SpectralField| -> Complex64 {
        let n = g.n();
        let mut s = Complex64::default();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let a = x.at((i, j, l));
                    let b = y.at((i, j, l));
                    s += cdot(&a, &b);
                }
            }
        }
        s * vol
    };
    let lhs = inner(&cu, &v);
    let rhs = inner(&u, &cv);
    let scale = u.parseval_norm_sq().sqrt() * v.parseval_norm_sq().sqrt() * g.k_min();
    assert!((lhs - rhs).norm() < 1e-12 * scale);
    // C^2 = |C|^2 on transverse data
    let ccu = apply_c(&cu);
    let mut diff = ccu.clone();
    diff.add_scaled(&u.wavenumber_power(2.0), -1.0);
    assert!(diff.parseval_norm_sq().sqrt() < 1e-11 * ccu.parseval_norm_sq().sqrt());
}

#[test]
fn helicity_projections_resolve_the_transverse_part() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let f = synth::random_band_limited(g, 3, &mut rng);
    let plus = helicity_project(&f, 1);
    let minus = helicity_project(&f, -1);
    let trans = helicity_core::field::transverse_project(&f);
    // completeness on the transverse zero-mean part
    let resum = plus.plus(&minus);
    assert!(l2_norm(&resum.minus(&trans)) < 1e-11 * l2_norm(&f));
    // idempotence and mutual annihilation
    assert!(l2_norm(&helicity_project(&plus, 1).minus(&plus)) < 1e-11 * l2_norm(&f));
    assert!(l2_norm(&helicity_project(&plus, -1)) < 1e-11 * l2_norm(&f));
    // orthogonality
    assert!(l2_inner(&plus, &minus).unwrap().abs() < 1e-11 * l2_norm(&f).powi(2));
    // curl acts as +|C| on the positive part
    let curl_plus = helicity_core::field::curl(&plus);
    let abs_plus = fractional_curl_power(&plus, 1.0).unwrap();
    assert!(l2_norm(&curl_plus.minus(&abs_plus)) < 1e-10 * l2_norm(&curl_plus).max(1e-300));
    // ... and as -|C| on the negative part
    let curl_minus = helicity_core::field::curl(&minus);
    let abs_minus = fractional_curl_power(&minus, 1.0).unwrap();
    assert!(
        l2_norm(&curl_minus.plus(&abs_minus)) < 1e-10 * l2_norm(&curl_minus).max(1e-300)
    );
}

#[test]
fn fractional_powers_compose_and_invert() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let f = synth::random_transverse(g, 3, &mut rng);
    let half = fractional_curl_power(&f, 0.5).unwrap();
    let back = fractional_curl_power(&half, -0.5).unwrap();
    assert!(l2_norm(&back.minus(&f)) < 1e-11 * l2_norm(&f));
    let twice = fractional_curl_power(&fractional_curl_power(&f, 0.7).unwrap(), 0.3).unwrap();
    let once = fractional_curl_power(&f, 1.0).unwrap();
    assert!(l2_norm(&twice.minus(&once)) < 1e-10 * l2_norm(&once));
    // exponent zero is the transverse identity
    let id = fractional_curl_power(&f, 0.0).unwrap();
    assert!(l2_norm(&id.minus(&f)) < 1e-12 * l2_norm(&f));
    // negative powers refuse a nonzero mean
    let mut with_mean = f.clone();
    with_mean.comp_mut(0).mapv_inplace(|v| v + 1.0);
    assert!(fractional_curl_power(&with_mean, -0.5).is_err());
}

#[test]
fn sobolev_norm_matches_single_mode_closed_form() {
    let g = grid(8);
    let n = g.n();
    // single transverse mode m = (0,0,2), coefficient c on axis 0
    let c = Complex64::new(0.3, -0.4);
    let mut spec = SpectralField::zeros(g);
    spec.set((0, 0, 2), [c, Complex64::default(), Complex64::default()]);
    spec.set(
        (0, 0, n - 2),
        [c.conj(), Complex64::default(), Complex64::default()],
    );
    let f = inverse_transform(&spec);
    let kn = 2.0 * g.k_min();
    let vol = g.length().powi(3);
    for s in [-0.5, 0.0, 0.5, 1.0, 1.7] {
        let expect = vol * 2.0 * c.norm_sqr() * kn.powf(2.0 * s);
        let got = h_norm_sq(&f, s);
        assert!(
            (got - expect).abs() < 1e-12 * expect,
            "s = {s}: {got} vs {expect}"
        );
    }
    // H_{1/2} as a quadratic form: ||f||_{1/2}^2 = <|C| f, f>
    let cf = fractional_curl_power(&f, 1.0).unwrap();
    let form = l2_inner(&cf, &f).unwrap();
    assert!((form - h_norm_sq(&f, 0.5)).abs() < 1e-12 * form);
}

#[test]
fn bw_norm_matches_mode_sum_oracle() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..5 {
        let modes = synth::random_mode_function(g, 4, &mut rng);
        let state = MaxwellState::from_mode_function(&modes, 0.0).unwrap();
        let bw = bw_norm_sq(&state.b(), state.e()).unwrap();
        // independent mode-sum: 4 L^3 sum_k |k| |a(k)|^2
        let n = g.n();
        let mut oracle = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let kn = g.wavenumber((i, j, l));
                    let e: f64 = modes.at((i, j, l)).iter().map(|z| z.norm_sqr()).sum();
                    oracle += kn * e;
                }
            }
        }
        oracle *= 4.0 * g.length().powi(3);
        assert!(
            (bw - oracle).abs() < 1e-11 * oracle,
            "bw {bw} vs oracle {oracle}"
        );
        // and the B-side alone equals the H_{1/2} norm of A
        let half = h_norm_sq(state.a(), 0.5);
        let b_side = h_norm_sq(&state.b(), -0.5);
        assert!((half - b_side).abs() < 1e-11 * half);
    }
    // non-transverse input is rejected
    let mut bad = synth::random_band_limited(g, 2, &mut rng);
    bad.comp_mut(0).mapv_inplace(|v| v + 0.0);
    let (long, _) = helicity_core::field::longitudinal_split(&bad);
    if l2_norm(&long) > 1e-6 {
        assert!(bw_norm_sq(&bad, &bad).is_err());
    }
}

#[test]
fn integral_quadrature_tracks_the_spectral_norm() {
    // The double-sum kernel quadrature is a crude O(n^6) estimator; calibrate
    // its constant on a family of smooth states and check consistency.
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut pairs = Vec::new();
    for _ in 0..4 {
        let modes = synth::random_mode_function(g, 1, &mut rng);
        let state = MaxwellState::from_mode_function(&modes, 0.0).unwrap();
        let spectral = bw_norm_sq(&state.b(), state.e()).unwrap();
        let raw = bw_norm_integral_raw(&state.b(), state.e(), 16).unwrap();
        assert!(raw > 0.0);
        pairs.push((spectral, raw));
    }
    let c = calibrate_integral_constant(&pairs);
    assert!(c.is_finite() && c > 0.0);
    for (spectral, raw) in &pairs {
        let rel = (c * raw - spectral).abs() / spectral;
        assert!(rel < 0.25, "calibrated mismatch {rel}");
    }
    // grid cap is honored
    assert!(bw_norm_integral_raw(
        &synth::random_transverse(g, 1, &mut rng),
        &synth::random_transverse(g, 1, &mut rng),
        4
    )
    .is_err());
}
