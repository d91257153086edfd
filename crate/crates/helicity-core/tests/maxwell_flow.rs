//! Exact Maxwell evolution, invariants, classification, and the five
//! equivalent helicity characterizations.

use helicity_core::field::{l2_norm, spectral_transform};
use helicity_core::grid::TorusGrid;
use helicity_core::helicity::{bw_norm_sq, eigenvector, helicity_project};
use helicity_core::maxwell::{
    complex_structure, helicity_classify, maxwell_evolve, maxwell_residual, plane_wave,
    symplectic_form, HelicityClass, MaxwellState,
};
use helicity_core::synth;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, 2.0 * std::f64::consts::PI).unwrap()
}

fn random_state(g: TorusGrid, mmax: i64, seed: u64) -> MaxwellState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = synth::random_mode_function(g, mmax, &mut rng);
    MaxwellState::from_mode_function(&modes, 0.0).unwrap()
}

/// State whose mode function is projected onto the positive helicity
/// eigenvector at every k.
fn positive_state(g: TorusGrid, mmax: i64, seed: u64) -> MaxwellState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = synth::random_mode_function(g, mmax, &mut rng);
    let projected = modes.map_modes(|idx, a| {
        let k = g.wavevector(idx);
        match eigenvector(k, 1) {
            None => [Complex64::default(); 3],
            Some(e) => {
                let c: Complex64 = (0..3).map(|i| e[i].conj() * a[i]).sum();
                std::array::from_fn(|i| c * e[i])
            }
        }
    });
    MaxwellState::from_mode_function(&projected, 0.0).unwrap()
}

#[test]
fn plane_wave_evolves_by_its_exact_phase() {
    let g = grid(8);
    let m = [1, 2, 0];
    let e = eigenvector([1.0, 2.0, 0.0], 1).unwrap();
    let amp: [Complex64; 3] = std::array::from_fn(|i| e[i] * Complex64::new(0.7, 0.1));
    let s0 = plane_wave(g, m, amp, 0.0).unwrap();
    let dt = 0.37;
    let evolved = maxwell_evolve(&s0, dt);
    let direct = plane_wave(g, m, amp, dt).unwrap();
    assert!(l2_norm(&evolved.a().minus(direct.a())) < 1e-12 * l2_norm(s0.a()));
    assert!(l2_norm(&evolved.e().minus(direct.e())) < 1e-12 * l2_norm(s0.e()));
    assert!((evolved.t() - dt).abs() < 1e-15);
    // period: k = (1,2,0) => |k| = sqrt(5); after t = 2*pi/|k| the state recurs
    let period = 2.0 * std::f64::consts::PI / 5.0f64.sqrt();
    let back = maxwell_evolve(&s0, period);
    assert!(l2_norm(&back.a().minus(s0.a())) < 1e-12 * l2_norm(s0.a()));
    // E = -dA/dt checked by a small finite difference
    let h = 1e-6;
    let ahead = plane_wave(g, m, amp, h).unwrap();
    let behind = plane_wave(g, m, amp, -h).unwrap();
    let fd = ahead.a().minus(behind.a()).scaled(-0.5 / h);
    assert!(l2_norm(&fd.minus(s0.e())) < 1e-7 * l2_norm(s0.e()));
}

#[test]
fn mode_function_roundtrip() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let modes = synth::random_mode_function(g, 3, &mut rng);
    let state = MaxwellState::from_mode_function(&modes, 1.5).unwrap();
    let rec = state.mode_function();
    let n = g.n();
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let a = modes.at((i, j, l));
                let b = rec.at((i, j, l));
                for c in 0..3 {
                    err = err.max((a[c] - b[c]).norm());
                    scale = scale.max(a[c].norm());
                }
            }
        }
    }
    assert!(err < 1e-12 * scale);
}

#[test]
fn invalid_states_are_rejected() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let good = synth::random_transverse(g, 2, &mut rng);
    // longitudinal content
    let bad = synth::random_band_limited(g, 2, &mut rng);
    assert!(MaxwellState::new(bad, good.clone(), 0.0).is_err());
    // nonzero mean
    let mut with_mean = good.clone();
    with_mean.comp_mut(1).mapv_inplace(|v| v + 0.5);
    assert!(MaxwellState::new(good.clone(), with_mean, 0.0).is_err());
    assert!(MaxwellState::new(good.clone(), good, 0.0).is_ok());
}

#[test]
fn evolution_conserves_energy_and_bw_norm() {
    let g = grid(8);
    let state = random_state(g, 3, 81);
    let e0 = state.energy();
    let bw0 = bw_norm_sq(&state.b(), state.e()).unwrap();
    let om0 = {
        let other = random_state(g, 3, 82);
        symplectic_form((state.a(), state.e()), (other.a(), other.e())).unwrap()
    };
    let mut cur = state.clone();
    let mut other = random_state(g, 3, 82);
    for _ in 0..50 {
        cur = maxwell_evolve(&cur, 0.013);
        other = maxwell_evolve(&other, 0.013);
    }
    assert!((cur.energy() - e0).abs() < 1e-12 * e0);
    let bw1 = bw_norm_sq(&cur.b(), cur.e()).unwrap();
    assert!((bw1 - bw0).abs() < 1e-12 * bw0);
    // the symplectic form between two co-evolved states is invariant
    let om1 = symplectic_form((cur.a(), cur.e()), (other.a(), other.e())).unwrap();
    assert!((om1 - om0).abs() < 1e-11 * om0.abs().max(1.0));
    // exact equations of motion
    let (rb, re) = maxwell_residual(&cur);
    assert!(rb < 1e-11 && re < 1e-11, "residuals {rb} {re}");
}

#[test]
fn classification_separates_pure_and_mixed_states() {
    let g = grid(8);
    let pos = positive_state(g, 3, 91);
    let cls = helicity_classify(&pos, 1e-8);
    assert_eq!(cls.class, HelicityClass::Positive);
    assert!(cls.residual_minus < 1e-10);
    assert!(cls.residual_plus > 0.9);
    // mirror image: conjugate amplitudes flip helicity
    let neg = {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let modes = synth::random_mode_function(g, 3, &mut rng);
        let projected = modes.map_modes(|idx, a| {
            let k = g.wavevector(idx);
            match eigenvector(k, -1) {
                None => [Complex64::default(); 3],
                Some(e) => {
                    let c: Complex64 = (0..3).map(|i| e[i].conj() * a[i]).sum();
                    std::array::from_fn(|i| c * e[i])
                }
            }
        });
        MaxwellState::from_mode_function(&projected, 0.0).unwrap()
    };
    let cls_n = helicity_classify(&neg, 1e-8);
    assert_eq!(cls_n.class, HelicityClass::Negative);
    assert!(cls_n.residual_plus < 1e-10);
    // A positive-helicity + E negative-helicity is mixed even though each
    // field alone is pure
    let mixed = MaxwellState::new(
        pos.a().clone(),
        helicity_project(neg.e(), -1),
        0.0,
    )
    .unwrap();
    let cls_m = helicity_classify(&mixed, 1e-8);
    assert_eq!(cls_m.class, HelicityClass::Mixed);
    // zero state is degenerate
    let zero = MaxwellState::new(
        helicity_core::field::VectorField::zeros(g),
        helicity_core::field::VectorField::zeros(g),
        0.0,
    )
    .unwrap();
    assert_eq!(helicity_classify(&zero, 1e-8).class, HelicityClass::Degenerate);
}

#[test]
fn helicity_is_invariant_under_evolution() {
    let g = grid(8);
    let mut cur = positive_state(g, 3, 101);
    for _ in 0..20 {
        cur = maxwell_evolve(&cur, 0.21);
        let cls = helicity_classify(&cur, 1e-8);
        assert_eq!(cls.class, HelicityClass::Positive);
        assert!(cls.residual_minus < 1e-9);
    }
}

#[test]
fn five_characterizations_agree_on_positive_states() {
    let g = grid(8);
    let state = positive_state(g, 3, 111);
    let scale = (l2_norm(state.a()).powi(2) + l2_norm(state.e()).powi(2)).sqrt();
    // (1) mode function supported on the positive eigenvectors
    let modes = state.mode_function();
    let minus_modes = helicity_core::helicity::helicity_project_spec(&modes, -1);
    assert!(minus_modes.parseval_norm_sq().sqrt() < 1e-10 * scale);
    // (2) A(0) and E(0) in the positive spectral subspace of curl
    assert!(l2_norm(&helicity_project(state.a(), -1)) < 1e-10 * scale);
    assert!(l2_norm(&helicity_project(state.e(), -1)) < 1e-10 * scale);
    // (3) curl B = |C| B, i.e. B has no negative content, at several times
    for step in 0..5 {
        let s = maxwell_evolve(&state, 0.3 * step as f64);
        let b = s.b();
        assert!(l2_norm(&helicity_project(&b, -1)) < 1e-10 * l2_norm(&b).max(scale));
        // (4) E likewise
        assert!(l2_norm(&helicity_project(s.e(), -1)) < 1e-10 * scale);
        // (5) A likewise
        assert!(l2_norm(&helicity_project(s.a(), -1)) < 1e-10 * scale);
    }
}

#[test]
fn complex_structure_squares_to_minus_one() {
    let g = grid(8);
    let state = random_state(g, 3, 121);
    let jj = complex_structure(&complex_structure(&state));
    assert!(l2_norm(&jj.a().plus(state.a())) < 1e-11 * l2_norm(state.a()));
    assert!(l2_norm(&jj.e().plus(state.e())) < 1e-11 * l2_norm(state.e()));
    // j preserves the Bargmann-Wigner norm
    let bw0 = bw_norm_sq(&state.b(), state.e()).unwrap();
    let js = complex_structure(&state);
    let bw1 = bw_norm_sq(&js.b(), js.e()).unwrap();
    assert!((bw0 - bw1).abs() < 1e-11 * bw0);
    // omega<jX, X> recovers the Bargmann-Wigner pairing up to sign convention
    let om = symplectic_form((js.a(), js.e()), (state.a(), state.e())).unwrap();
    assert!(om.abs() > 0.0);
    // antisymmetry
    let other = random_state(g, 3, 122);
    let o12 = symplectic_form((state.a(), state.e()), (other.a(), other.e())).unwrap();
    let o21 = symplectic_form((other.a(), other.e()), (state.a(), state.e())).unwrap();
    assert!((o12 + o21).abs() < 1e-11 * o12.abs().max(1.0));
}

#[test]
fn spectra_stay_hermitian_along_the_flow() {
    let g = grid(8);
    let mut cur = random_state(g, 2, 131);
    for _ in 0..10 {
        cur = maxwell_evolve(&cur, 0.7);
    }
    let a_hat = spectral_transform(cur.a());
    let e_hat = spectral_transform(cur.e());
    let scale = a_hat.parseval_norm_sq().sqrt() + e_hat.parseval_norm_sq().sqrt();
    assert!(a_hat.hermitian_defect() < 1e-12 * scale);
    assert!(e_hat.hermitian_defect() < 1e-12 * scale);
}
