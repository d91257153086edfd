//! The non-abelian Poisson solver against its abelian closed forms, the
//! action-derivative identities, the linearized (variational) solves, the
//! h-fields and their flow, and the horizontal/vertical geometry.

use helicity_core::abelian::{poisson_action_abelian, poisson_extend_abelian};
use helicity_core::field::{inverse_transform, SpectralField, VectorField};
use helicity_core::grid::TorusGrid;
use helicity_core::halfspace::reinterpret;
use helicity_core::helicity;
use helicity_core::lie::{self, covariant_d, covariant_d_star, LieField};
use helicity_core::synth;
use helicity_core::ym::{
    action_gradient, action_hessian_form, boundary_slope_fd, curl_a_quadratic_form, h_field,
    h_flow, horizontal_vertical_split, riemannian_norm, variational_solve, ym_poisson_solve,
    ym_poisson_solve_from, SolverParams,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid8() -> TorusGrid {
    TorusGrid::new(8, std::f64::consts::TAU).unwrap()
}

fn params(m: usize) -> SolverParams {
    SolverParams {
        s_nodes: m,
        ..SolverParams::default()
    }
}

/// A real Beltrami field with curl w = |k| w concentrated on a single +/- k pair.
fn beltrami_mode(grid: TorusGrid, m: (usize, usize, usize), amp: f64) -> VectorField {
    let mut spec = SpectralField::zeros(grid);
    let k = grid.wavevector(m);
    let e = helicity::eigenvector(k, 1).unwrap();
    let c = Complex64::new(amp, 0.3 * amp);
    spec.set(m, std::array::from_fn(|i| c * e[i]));
    let neg = (
        grid.neg_index(m.0),
        grid.neg_index(m.1),
        grid.neg_index(m.2),
    );
    let cur = spec.at(m);
    spec.set(neg, std::array::from_fn(|i| cur[i].conj()));
    inverse_transform(&spec)
}

#[test]
fn abelian_data_reproduces_the_closed_form_extension() {
    let grid = grid8();
    let p = params(64);
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    let v = synth::random_transverse(grid, 2, &mut rng);
    let a = LieField::from_abelian(&v, 0);
    let sol = ym_poisson_solve(&a, &p).expect("abelian solve");
    assert!(sol.converged);
    // brackets vanish on a single Lie direction, so the preconditioner is the
    // exact inverse Hessian and the quasi-Newton iteration collapses quickly
    assert!(
        sol.history.len() < 40,
        "abelian solve took {} iterations",
        sol.history.len()
    );

    // layer-wise agreement with e^{-s|C|} A
    let scale = lie::l2_norm(&a);
    let s = sol.stack.s_grid().clone();
    for (j, &sj) in s.points().iter().enumerate() {
        let exact = poisson_extend_abelian(&v, sj).unwrap();
        let got = sol.stack.layer(j).abelian_component(0);
        let diff = helicity_core::field::l2_norm(&got.minus(&exact));
        assert!(diff < 1e-3 * scale, "layer {j} at s = {sj}: {diff:.3e}");
        for lie_dir in 1..3 {
            let leak = helicity_core::field::l2_norm(&sol.stack.layer(j).abelian_component(lie_dir));
            assert!(leak < 1e-9 * scale, "Lie leakage {leak:.3e} at layer {j}");
        }
    }

    // action agrees with <|C| A, A>
    let exact_action = poisson_action_abelian(&v);
    assert!(
        (sol.action - exact_action).abs() < 1e-4 * exact_action,
        "action {} vs {}",
        sol.action,
        exact_action
    );

    // boundary flux equals -|C| A, and the one-sided difference agrees
    let expected = helicity::fractional_curl_power(&v, 1.0).unwrap().scaled(-1.0);
    let got_slope = sol.boundary_slope.abelian_component(0);
    let slope_err = helicity_core::field::l2_norm(&got_slope.minus(&expected));
    let slope_scale = helicity_core::field::l2_norm(&expected);
    assert!(
        slope_err < 1e-3 * slope_scale,
        "boundary slope off by {slope_err:.3e} of {slope_scale:.3e}"
    );
    let fd = boundary_slope_fd(&sol.stack);
    let fd_err = lie::l2_norm(&fd.minus(&sol.boundary_slope));
    assert!(
        fd_err < 2e-2 * slope_scale,
        "one-sided difference off by {fd_err:.3e}"
    );
}

#[test]
fn variational_solve_matches_the_abelian_decay() {
    let grid = grid8();
    let p = params(64);
    // flat background: the linearized equation is u'' = curl curl u
    let sol = ym_poisson_solve(&LieField::zeros(grid, 1).unwrap(), &p).expect("flat solve");
    let mut rng = ChaCha8Rng::seed_from_u64(411);
    let v = synth::random_transverse(grid, 2, &mut rng);
    let u0 = LieField::from_abelian(&v, 1);
    let ext = variational_solve(&sol, &u0, &p).unwrap();
    let scale = lie::l2_norm(&u0);
    for (j, &sj) in ext.stack.s_grid().points().iter().enumerate() {
        let exact = poisson_extend_abelian(&v, sj).unwrap();
        let got = ext.stack.layer(j).abelian_component(1);
        let diff = helicity_core::field::l2_norm(&got.minus(&exact));
        assert!(diff < 1e-3 * scale, "layer {j} at s = {sj}: {diff:.3e}");
    }
    // <u0, -u'(0)> = <|C| u0, u0>
    let pairing = -lie::l2_inner(&u0, &ext.boundary_flux).unwrap();
    let exact = poisson_action_abelian(&v);
    assert!(
        (pairing - exact).abs() < 1e-3 * exact,
        "boundary pairing {pairing} vs {exact}"
    );
}

#[test]
fn action_gradient_matches_finite_differences() {
    let grid = grid8();
    let p = params(48);
    let mut rng = ChaCha8Rng::seed_from_u64(421);
    let a = lie::random_lie_field(grid, 1, 1, &mut rng).scaled(0.05);
    let sol = ym_poisson_solve(&a, &p).expect("base solve");
    for dir in 0..2 {
        let u = lie::random_lie_field(grid, 1, 1, &mut rng);
        let g = action_gradient(&sol, &u).unwrap();
        let eps = 1e-3 * lie::l2_norm(&a) / lie::l2_norm(&u);
        let mut ap = a.clone();
        ap.add_scaled(&u, eps);
        let mut am = a.clone();
        am.add_scaled(&u, -eps);
        // re-minimize at the shifted boundary data, warm-started
        let sp = ym_poisson_solve_from(&ap, &p, Some(&sol.stack)).expect("plus solve");
        let sm = ym_poisson_solve_from(&am, &p, Some(&sol.stack)).expect("minus solve");
        let fd = (sp.action - sm.action) / (2.0 * eps);
        assert!(
            (g - fd).abs() < 1e-3 * fd.abs().max(g.abs()),
            "direction {dir}: dP = {g} vs finite difference {fd}"
        );
    }
}

#[test]
fn hessian_form_is_symmetric_and_equals_minus_the_boundary_pairing() {
    let grid = grid8();
    let p = params(48);
    let mut rng = ChaCha8Rng::seed_from_u64(431);
    let a = lie::random_lie_field(grid, 1, 1, &mut rng).scaled(0.05);
    let sol = ym_poisson_solve(&a, &p).expect("base solve");
    let u = lie::random_lie_field(grid, 1, 1, &mut rng).scaled(0.05);
    let v = lie::random_lie_field(grid, 1, 1, &mut rng).scaled(0.05);
    let uext = variational_solve(&sol, &u, &p).unwrap();
    let vext = variational_solve(&sol, &v, &p).unwrap();
    let form = action_hessian_form(&sol, &uext, &vext, &p).unwrap();
    let scale = form.integral.abs().max(form.boundary_uv.abs());
    assert!(
        (form.boundary_uv - form.boundary_vu).abs() < 1e-6 * scale,
        "<u, v'(0)> = {} vs <v, u'(0)> = {}",
        form.boundary_uv,
        form.boundary_vu
    );
    assert!(
        (form.integral + form.boundary_uv).abs() < 1e-6 * scale,
        "integral {} vs boundary {}",
        form.integral,
        form.boundary_uv
    );
}

#[test]
fn h_field_reduces_to_the_abelian_formula() {
    let grid = grid8();
    let p = params(64);
    let mut rng = ChaCha8Rng::seed_from_u64(441);
    let v = synth::random_transverse(grid, 2, &mut rng);
    let a = LieField::from_abelian(&v, 2);
    for sign in [1, -1] {
        let (h, _sol) = h_field(&a, sign, &p).expect("abelian h-field");
        let exact = helicity_core::abelian::h_field_abelian(&v, sign);
        let got = h.abelian_component(2);
        let err = helicity_core::field::l2_norm(&got.minus(&exact));
        let scale = helicity_core::field::l2_norm(&exact);
        assert!(
            err < 1e-3 * scale,
            "sign {sign}: h off by {err:.3e} of {scale:.3e}"
        );
        for lie_dir in 0..2 {
            let leak = helicity_core::field::l2_norm(&h.abelian_component(lie_dir));
            assert!(leak < 1e-9 * scale);
        }
    }
}

#[test]
fn h_flow_decreases_the_action_and_the_h_norm() {
    let grid = grid8();
    let p = params(48);
    let mut rng = ChaCha8Rng::seed_from_u64(451);
    let a0 = lie::random_lie_field(grid, 1, 1, &mut rng).scaled(0.05);
    let flow = h_flow(&a0, 1, 0.6, 0.0, &p).expect("flow");
    assert!(flow.times.len() >= 3, "flow took only {:?}", flow.times);
    for w in flow.actions.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-8 * flow.actions[0].abs(),
            "action increased: {:?}",
            flow.actions
        );
    }
    let first = flow.h_norms[0];
    let last = *flow.h_norms.last().unwrap();
    assert!(last < first, "||h|| did not decrease: {first} -> {last}");
}

#[test]
fn horizontal_vertical_split_separates_gauge_directions() {
    let grid = grid8();
    let p = params(48);
    let mut rng = ChaCha8Rng::seed_from_u64(461);
    let a = lie::random_lie_field(grid, 1, 1, &mut rng).scaled(0.1);
    let w = lie::random_lie_field(grid, 1, 2, &mut rng);
    let (u, v) = horizontal_vertical_split(&a, &w, &p).unwrap();
    // the two parts reassemble w exactly
    let recon = u.plus(&v);
    assert!(lie::l2_norm(&recon.minus(&w)) < 1e-12 * lie::l2_norm(&w));
    // horizontality: d_A* u = 0 up to the linear-solve tolerance
    let defect = lie::l2_norm(&covariant_d_star(&a, &u).unwrap());
    let raw = lie::l2_norm(&covariant_d_star(&a, &w).unwrap());
    assert!(defect < 1e-6 * raw, "d_A* u = {defect:.3e} vs d_A* w = {raw:.3e}");
    // L2 orthogonality of the split
    let ip = lie::l2_inner(&u, &v).unwrap();
    assert!(ip.abs() < 1e-6 * lie::l2_norm(&u) * lie::l2_norm(&v).max(1e-300));
    // a pure gauge direction is entirely vertical
    let lam = lie::random_lie_field(grid, 0, 1, &mut rng);
    let wg = covariant_d(&a, &lam).unwrap();
    let (ug, vg) = horizontal_vertical_split(&a, &wg, &p).unwrap();
    assert!(lie::l2_norm(&ug) < 1e-6 * lie::l2_norm(&wg));
    assert!(lie::l2_norm(&vg.minus(&wg)) < 1e-6 * lie::l2_norm(&wg));
}

#[test]
fn riemannian_norm_recovers_the_abelian_half_norms() {
    let grid = grid8();
    let p = params(64);
    let flat = LieField::zeros(grid, 1).unwrap();
    let sol = ym_poisson_solve(&flat, &p).expect("flat solve");
    // a transverse direction is horizontal, with Dirichlet energy <|C| w, w>
    let mut rng = ChaCha8Rng::seed_from_u64(471);
    let v = synth::random_transverse(grid, 2, &mut rng);
    let w = LieField::from_abelian(&v, 0);
    let rn = riemannian_norm(&flat, &w, &sol, &p).unwrap();
    assert!(rn.vertical_sq < 1e-6 * rn.total_sq);
    let exact = poisson_action_abelian(&v);
    assert!(
        (rn.horizontal_sq - exact).abs() < 1e-3 * exact,
        "horizontal {} vs {}",
        rn.horizontal_sq,
        exact
    );
    // a gradient direction is vertical: for a single |k| = 1 mode the
    // quarter-Laplacian weight is |k|^(1/2) = 1, so the norm is plain L2
    let mut lam = LieField::zeros(grid, 0).unwrap();
    let n = grid.n();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                lam.comp_mut(0, 0)[(x, y, z)] = (grid.point((x, y, z))[0]).cos();
            }
        }
    }
    let wg = covariant_d(&flat, &lam).unwrap();
    let rng_ = riemannian_norm(&flat, &wg, &sol, &p).unwrap();
    assert!(rng_.horizontal_sq < 1e-6 * rng_.total_sq);
    let l2 = lie::l2_inner(&wg, &wg).unwrap();
    assert!(
        (rng_.vertical_sq - l2).abs() < 1e-6 * l2,
        "vertical {} vs {}",
        rng_.vertical_sq,
        l2
    );
}

#[test]
fn curl_a_form_is_the_helicity_pairing_at_the_flat_connection() {
    let grid = grid8();
    let p = params(48);
    let flat = LieField::zeros(grid, 1).unwrap();
    // positive Beltrami direction: curl w = |k| w with |k| = k_min
    let w = beltrami_mode(grid, (1, 0, 0), 0.8);
    let u = LieField::from_abelian(&w, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(481);
    let q = curl_a_quadratic_form(&flat, &u, -1, &p, 1e-8, &mut rng).unwrap();
    let exact = grid.k_min() * lie::l2_inner(&u, &u).unwrap();
    assert!(
        (q - exact).abs() < 1e-2 * exact,
        "<u, *d u> = {q} vs |k| ||u||^2 = {exact}"
    );
    // the sign flips with the helicity of the probe direction
    let curl_u = reinterpret(&lie::d(&u).unwrap(), 1);
    assert!(lie::l2_inner(&u, &curl_u).unwrap() > 0.0);
}
