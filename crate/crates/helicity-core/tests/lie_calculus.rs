//! su(2) algebra, Lie-valued exterior calculus, exact lattice adjointness,
//! and gauge covariance.

use helicity_core::grid::TorusGrid;
use helicity_core::lie::{
    self, bracket_hook, bracket_wedge, covariant_d, covariant_d_star, curvature3, d, d_star,
    gauge_transform, l2_inner, l2_norm, random_lie_field, GaugeFunction, LieField,
};
use helicity_core::su2::{
    self, bracket, dot, lie_of_pure_quat, qconj, qexp_pure, qmul, qnorm, quat_of_lie, Su2,
};
use helicity_core::synth;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, 2.0 * std::f64::consts::PI).unwrap()
}

fn rand_su2<R: Rng>(rng: &mut R) -> Su2 {
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

#[test]
fn su2_bracket_is_a_lie_bracket_with_invariant_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for _ in 0..20 {
        let x = rand_su2(&mut rng);
        let y = rand_su2(&mut rng);
        let z = rand_su2(&mut rng);
        // antisymmetry
        let xy = bracket(x, y);
        let yx = bracket(y, x);
        for a in 0..3 {
            assert!((xy[a] + yx[a]).abs() < 1e-14);
        }
        // Jacobi
        let mut jac = bracket(x, bracket(y, z));
        let t2 = bracket(y, bracket(z, x));
        let t3 = bracket(z, bracket(x, y));
        for a in 0..3 {
            jac[a] += t2[a] + t3[a];
            assert!(jac[a].abs() < 1e-13);
        }
        // ad-invariance of the inner product
        assert!((dot(bracket(x, y), z) - dot(x, bracket(y, z))).abs() < 1e-13);
    }
}

#[test]
fn quaternion_model_of_su2() {
    let mut rng = ChaCha8Rng::seed_from_u64(311);
    for _ in 0..20 {
        let x = rand_su2(&mut rng);
        let y = rand_su2(&mut rng);
        // quat_of_lie is a section of lie_of_pure_quat
        let back = lie_of_pure_quat(quat_of_lie(x));
        for a in 0..3 {
            assert!((back[a] - x[a]).abs() < 1e-15);
        }
        // the bracket is the quaternion commutator
        let qx = quat_of_lie(x);
        let qy = quat_of_lie(y);
        let comm = {
            let ab = qmul(qx, qy);
            let ba = qmul(qy, qx);
            su2::qadd(ab, su2::qscale(ba, -1.0))
        };
        assert!(comm[0].abs() < 1e-14, "commutator not pure");
        let br = bracket(x, y);
        let cv = lie_of_pure_quat(comm);
        for a in 0..3 {
            assert!((cv[a] - br[a]).abs() < 1e-13);
        }
        // exp of a pure quaternion is unit
        let g = qexp_pure([0.3 * x[0], 0.3 * x[1], 0.3 * x[2]]);
        assert!((qnorm(g) - 1.0).abs() < 1e-14);
        // Ad_{g^{-1}} preserves the form and the bracket
        let ax = su2::ad_inverse(g, x);
        let ay = su2::ad_inverse(g, y);
        assert!((dot(ax, ay) - dot(x, y)).abs() < 1e-13);
        let bb = su2::ad_inverse(g, bracket(x, y));
        let ba = bracket(ax, ay);
        for a in 0..3 {
            assert!((bb[a] - ba[a]).abs() < 1e-13);
        }
        // qconj inverts: Ad_{g^{-1}} then Ad_g is the identity
        let round = su2::ad_inverse(qconj(g), ax);
        for a in 0..3 {
            assert!((round[a] - x[a]).abs() < 1e-13);
        }
    }
}

#[test]
fn exterior_derivative_squares_to_zero() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    let lam = random_lie_field(g, 0, 3, &mut rng);
    let one = random_lie_field(g, 1, 3, &mut rng);
    let dd0 = d(&d(&lam).unwrap()).unwrap();
    assert!(lie::l2_norm(&dd0) < 1e-11 * lie::l2_norm(&lam) * g.k_min().powi(2));
    let dd1 = d(&d(&one).unwrap()).unwrap();
    assert!(lie::l2_norm(&dd1) < 1e-11 * lie::l2_norm(&one) * g.k_min().powi(2));
    // and dually (d*)^2 = 0
    let two = random_lie_field(g, 2, 3, &mut rng);
    let ss = d_star(&d_star(&two).unwrap()).unwrap();
    assert!(lie::l2_norm(&ss) < 1e-11 * lie::l2_norm(&two) * g.k_min().powi(2));
    // degree guards
    let three = random_lie_field(g, 3, 3, &mut rng);
    assert!(d(&three).is_err());
    assert!(d_star(&lam).is_err());
}

#[test]
fn d_and_d_star_are_exact_lattice_adjoints() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(331);
    for degree in 0..3usize {
        let u = random_lie_field(g, degree, 3, &mut rng);
        let v = random_lie_field(g, degree + 1, 3, &mut rng);
        let lhs = l2_inner(&d(&u).unwrap(), &v).unwrap();
        let rhs = l2_inner(&u, &d_star(&v).unwrap()).unwrap();
        let scale = l2_norm(&u) * l2_norm(&v) * g.k_min();
        assert!(
            (lhs - rhs).abs() < 1e-11 * scale,
            "degree {degree}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn wedge_and_hook_are_pointwise_adjoints() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(341);
    // <[u -| v], w> = <v, [u ^ w]> for every supported degree combination
    let cases: [(usize, usize); 4] = [(1, 1), (1, 2), (0, 1), (2, 2)];
    for (p, r) in cases {
        let u = random_lie_field(g, p, 2, &mut rng);
        let v = random_lie_field(g, r, 2, &mut rng);
        let w = random_lie_field(g, r - p, 2, &mut rng);
        let lhs = l2_inner(&bracket_hook(&u, &v).unwrap(), &w).unwrap();
        let rhs = l2_inner(&v, &bracket_wedge(&u, &w).unwrap()).unwrap();
        let scale = l2_norm(&u) * l2_norm(&v) * l2_norm(&w);
        assert!(
            (lhs - rhs).abs() < 1e-11 * scale,
            "degrees ({p}, {r}): {lhs} vs {rhs}"
        );
    }
}

#[test]
fn wedge_symmetry_and_abelian_degeneration() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(351);
    // for 1-forms the commutator wedge is symmetric
    let u = random_lie_field(g, 1, 2, &mut rng);
    let v = random_lie_field(g, 1, 2, &mut rng);
    let uv = bracket_wedge(&u, &v).unwrap();
    let vu = bracket_wedge(&v, &u).unwrap();
    assert!(lie::l2_norm(&uv.minus(&vu)) < 1e-12 * lie::l2_norm(&uv).max(1e-300));
    // fields along a single Lie direction commute: curvature is then just da
    let a_real = synth::random_transverse(g, 2, &mut rng);
    let a = LieField::from_abelian(&a_real, 2);
    let self_wedge = bracket_wedge(&a, &a).unwrap();
    assert!(lie::l2_norm(&self_wedge) < 1e-13);
    let b = curvature3(&a).unwrap();
    let da = d(&a).unwrap();
    assert!(lie::l2_norm(&b.minus(&da)) < 1e-12 * lie::l2_norm(&da));
    // and the abelian slice of da is the ordinary curl
    let curl_a = helicity_core::field::curl(&a_real);
    let slice = b.abelian_component(2);
    let diff = slice.minus(&curl_a);
    assert!(helicity_core::field::l2_norm(&diff) < 1e-12 * helicity_core::field::l2_norm(&curl_a));
}

#[test]
fn covariant_operators_are_adjoint_and_satisfy_bianchi() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(361);
    let conn = random_lie_field(g, 1, 2, &mut rng);
    for degree in [0usize, 1, 2] {
        let u = random_lie_field(g, degree, 2, &mut rng);
        let v = random_lie_field(g, degree + 1, 2, &mut rng);
        let lhs = l2_inner(&covariant_d(&conn, &u).unwrap(), &v).unwrap();
        let rhs = l2_inner(&u, &covariant_d_star(&conn, &v).unwrap()).unwrap();
        let scale = l2_norm(&u) * l2_norm(&v) * (g.k_min() + l2_norm(&conn));
        assert!(
            (lhs - rhs).abs() < 1e-11 * scale,
            "degree {degree}: {lhs} vs {rhs}"
        );
    }
    // d_A d_A lambda = [b ^ lambda] for Lie scalars. These identities use
    // lattice Leibniz rules, which are exact only when every product stays
    // strictly inside the resolved band, hence the tighter band limit.
    let conn = random_lie_field(g, 1, 1, &mut rng);
    let lam = random_lie_field(g, 0, 1, &mut rng);
    let dd = covariant_d(&conn, &covariant_d(&conn, &lam).unwrap()).unwrap();
    let b = curvature3(&conn).unwrap();
    let want = bracket_wedge(&b, &lam).unwrap();
    assert!(
        lie::l2_norm(&dd.minus(&want)) < 1e-11 * lie::l2_norm(&want).max(1e-300),
        "{} vs {}",
        lie::l2_norm(&dd),
        lie::l2_norm(&want)
    );
    // Bianchi identity d_A b = 0
    let db = covariant_d(&conn, &b).unwrap();
    assert!(lie::l2_norm(&db) < 1e-11 * lie::l2_norm(&b) * (g.k_min() + l2_norm(&conn)));
}

#[test]
fn gauge_functions_form_a_group() {
    let g = grid(8);
    let mut rng = ChaCha8Rng::seed_from_u64(371);
    let g1 = GaugeFunction::random(g, 1, 0.4, &mut rng);
    let g2 = GaugeFunction::random(g, 1, 0.3, &mut rng);
    assert!(g1.unitarity_defect() < 1e-13);
    let id = GaugeFunction::identity(g);
    assert!(id.unitarity_defect() < 1e-15);
    // g * g^{-1} = id, checked through conjugation acting trivially
    let prod = g1.compose(&g1.inverse());
    let x = random_lie_field(g, 1, 2, &mut rng);
    let conj = prod.conjugate(&x);
    assert!(lie::l2_norm(&conj.minus(&x)) < 1e-12 * lie::l2_norm(&x));
    // conjugation preserves the norm
    let cx = g2.conjugate(&x);
    assert!((lie::l2_norm(&cx) - lie::l2_norm(&x)).abs() < 1e-12 * lie::l2_norm(&x));
    // Maurer-Cartan form of the identity vanishes
    assert!(lie::l2_norm(&id.maurer_cartan()) < 1e-13);
}

#[test]
fn gauge_transformations_act_and_curvature_is_covariant() {
    // n = 16: the gauge function is analytic but not band-limited, so the
    // spectral Maurer-Cartan form carries a truncation error that must be
    // resolved away
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(381);
    let a = random_lie_field(g, 1, 1, &mut rng).scaled(0.5);
    let gf = GaugeFunction::random(g, 1, 0.2, &mut rng);
    let ag = gauge_transform(&a, &gf).unwrap();
    // right action: transforming back recovers A
    let back = gauge_transform(&ag, &gf.inverse()).unwrap();
    assert!(
        lie::l2_norm(&back.minus(&a)) < 1e-8 * lie::l2_norm(&a),
        "defect {}",
        lie::l2_norm(&back.minus(&a)) / lie::l2_norm(&a)
    );
    // composition law: (A^{g1})^{g2} = A^{g1 g2}
    let g2 = GaugeFunction::random(g, 1, 0.15, &mut rng);
    let two_step = gauge_transform(&ag, &g2).unwrap();
    let one_step = gauge_transform(&a, &gf.compose(&g2)).unwrap();
    assert!(lie::l2_norm(&two_step.minus(&one_step)) < 1e-8 * lie::l2_norm(&a).max(1.0));
    // curvature transforms by conjugation
    let b_g = curvature3(&ag).unwrap();
    let want = gf.conjugate(&curvature3(&a).unwrap());
    assert!(
        lie::l2_norm(&b_g.minus(&want)) < 1e-7 * lie::l2_norm(&want).max(1e-300),
        "covariance defect {}",
        lie::l2_norm(&b_g.minus(&want)) / lie::l2_norm(&want)
    );
    // pure-gauge connections are flat
    let pure = gauge_transform(&LieField::zeros(g, 1).unwrap(), &gf).unwrap();
    let flat = curvature3(&pure).unwrap();
    assert!(
        lie::l2_norm(&flat) < 1e-7 * lie::l2_norm(&pure) * g.k_min(),
        "pure-gauge curvature {}",
        lie::l2_norm(&flat)
    );
}

#[test]
fn dealias_filter_keeps_the_low_band() {
    let g = grid(8); // cutoff at n/3 = 2
    let mut rng = ChaCha8Rng::seed_from_u64(391);
    let low = random_lie_field(g, 1, 2, &mut rng);
    let filtered = lie::dealias(&low);
    assert!(lie::l2_norm(&filtered.minus(&low)) < 1e-12 * lie::l2_norm(&low));
    let high = random_lie_field(g, 1, 4, &mut rng);
    let cut = lie::dealias(&cut_input(&high));
    // idempotent
    let twice = lie::dealias(&cut);
    assert!(lie::l2_norm(&twice.minus(&cut)) < 1e-12 * lie::l2_norm(&cut).max(1e-300));
    fn cut_input(f: &LieField) -> LieField {
        f.clone()
    }
}
