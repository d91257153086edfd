//! The registered experiments. Each one re-derives a statement from the
//! continuum theory at desk scale, emits every measured quantity as a metric
//! tagged with the statement it tests, and asserts its own pass/fail checks.

use std::path::Path;

use anyhow::{bail, Context, Result};
use helicity_core::abelian::{
    duality_residual_abelian, helicity_flow_abelian, poisson_action_abelian,
    poisson_extend_abelian,
};
use helicity_core::field::l2_norm;
use helicity_core::grid::TorusGrid;
use helicity_core::helicity::{
    bw_norm_integral_raw, bw_norm_sq, calibrate_integral_constant, eigenvector, helicity_project,
    helicity_project_spec,
};
use helicity_core::instanton::{residual_refinement_study, Instanton};
use helicity_core::lie::{self, covariant_d_star, LieField};
use helicity_core::maxwell::{maxwell_evolve, symplectic_form, MaxwellState};
use helicity_core::su2;
use helicity_core::synth;
use helicity_core::ym::{
    action_gradient, action_hessian_form, h_field, h_flow, variational_solve, ym_poisson_solve,
    ym_poisson_solve_from, SolverParams,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::plot::{line_plot, Series};

pub struct Metric {
    pub name: String,
    pub value: f64,
    /// the mathematical statement this number tests
    pub tests: String,
}

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Default)]
pub struct Outcome {
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn metric(&mut self, name: &str, value: f64, tests: &str) {
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
            tests: tests.to_string(),
        });
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            detail,
        });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Registry: experiment name and the statement it exercises, as printed by
/// `list`.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    (
        "bw-norm-equality",
        "||(B,E)||_bw^2 = 4 L^3 sum_k |k| |a(k)|^2 for the mode function a",
    ),
    (
        "helicity-equivalence",
        "A in C+ <=> curl A = |curl| A <=> a(k) parallel to e+(k) for every k, preserved by the wave flow",
    ),
    (
        "maxwell-conservation",
        "d/dt ||(B,E)||_bw^2 = 0 and d/dt omega((A1,E1),(A2,E2)) = 0 along A'' = -curl curl A",
    ),
    (
        "abelian-duality",
        "A in C+- <=> the Poisson extension satisfies a' = -+ *da (anti-self-dual / self-dual)",
    ),
    (
        "abelian-flow",
        "A(t) = P+ A + e^{-2t|C|} P- A, so the defect decays at the rate 2 |k_min|",
    ),
    (
        "ym-oracle-abelian",
        "for u(1)-embedded data the minimizing extension is a(s) = e^{-s|C|} a with P(A) = <|C| a, a>",
    ),
    (
        "ym-gradient-check",
        "d_u P(A) = -2 <u, a'(0)> at the minimizing extension (envelope identity)",
    ),
    (
        "ym-hessian-symmetry",
        "<u(0), v'(0)> = <v(0), u'(0)> = -(||u'||^2 + ||d_A u||^2 + 2<[u ^ v'], ...>) pairing for variational extensions",
    ),
    (
        "instanton-residuals",
        "A(x,s) = s^2/(s^2 + rho^2 + |x|^2) g dg^{-1} is temporal-gauge, solves the Euler equation, and has F = -*F",
    ),
    (
        "h-flow-nonabelian",
        "dA/dt = h_+(A) decreases P(A) monotonically and converges to the stratum h_+ = 0",
    ),
    (
        "integral-norm-calibration",
        "||(B,E)||_bw^2 = c * iint (|B(x)-B(y)|^2 + |E(x)-E(y)|^2) / |x-y|^4 dx dy for one constant c",
    ),
    (
        "convexity-probe",
        "samples of the Rayleigh quotient Q(u)/||u||^2 of the second variation of P near A = 0 (data only)",
    ),
];

pub fn run(cfg: &Config, dir: &Path) -> Result<Outcome> {
    match cfg.experiment.as_str() {
        "bw-norm-equality" => bw_norm_equality(cfg, dir),
        "helicity-equivalence" => helicity_equivalence(cfg, dir),
        "maxwell-conservation" => maxwell_conservation(cfg, dir),
        "abelian-duality" => abelian_duality(cfg, dir),
        "abelian-flow" => abelian_flow(cfg, dir),
        "ym-oracle-abelian" => ym_oracle_abelian(cfg, dir),
        "ym-gradient-check" => ym_gradient_check(cfg, dir),
        "ym-hessian-symmetry" => ym_hessian_symmetry(cfg, dir),
        "instanton-residuals" => instanton_residuals(cfg, dir),
        "h-flow-nonabelian" => h_flow_nonabelian(cfg, dir),
        "integral-norm-calibration" => integral_norm_calibration(cfg, dir),
        "convexity-probe" => convexity_probe(cfg, dir),
        other => bail!("unknown experiment '{other}'; run `helicity-lab list` for the registry"),
    }
}

fn grid(cfg: &Config) -> Result<TorusGrid> {
    TorusGrid::new(cfg.n, cfg.length).context("building the torus grid")
}

fn solver_params(cfg: &Config) -> SolverParams {
    SolverParams {
        s_nodes: cfg.s_nodes,
        ..SolverParams::default()
    }
}

fn small_connection(g: TorusGrid, cfg: &Config, seed: u64) -> LieField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lie::random_lie_field(g, 1, cfg.mmax, &mut rng).scaled(cfg.amplitude)
}

fn pure_helicity_state(g: TorusGrid, mmax: i64, seed: u64, sign: i32) -> Result<MaxwellState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = synth::random_mode_function(g, mmax, &mut rng);
    let projected = modes.map_modes(|idx, a| {
        let k = g.wavevector(idx);
        match eigenvector(k, sign) {
            None => [Complex64::default(); 3],
            Some(e) => {
                let c: Complex64 = (0..3).map(|i| e[i].conj() * a[i]).sum();
                std::array::from_fn(|i| c * e[i])
            }
        }
    });
    Ok(MaxwellState::from_mode_function(&projected, 0.0)?)
}

fn log10_floor(v: f64) -> f64 {
    v.max(1e-18).log10()
}

fn bw_norm_equality(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let statement = "||(B,E)||_bw^2 = 4 L^3 sum_k |k| |a(k)|^2";
    let mut out = Outcome::default();
    let mut points = Vec::new();
    let mut worst = 0.0f64;
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial as u64));
        let modes = synth::random_mode_function(g, cfg.mmax, &mut rng);
        let state = MaxwellState::from_mode_function(&modes, 0.0)?;
        let got = bw_norm_sq(&state.b(), state.e())?;
        let n = g.n();
        let mut oracle = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let kn = g.wavenumber((i, j, l));
                    let a = modes.at((i, j, l));
                    oracle += kn * a.iter().map(|z| z.norm_sqr()).sum::<f64>();
                }
            }
        }
        oracle *= 4.0 * g.length().powi(3);
        let rel = (got - oracle).abs() / oracle;
        worst = worst.max(rel);
        points.push((trial as f64, log10_floor(rel)));
    }
    out.metric("worst_relative_error", worst, statement);
    out.metric("trials", cfg.trials as f64, statement);
    out.check(
        "spectral norm equals the mode-sum oracle",
        worst < 1e-10,
        format!("{} random states, worst relative error {worst:.3e} (< 1e-10)", cfg.trials),
    );
    line_plot(
        &dir.join("relative_error.svg"),
        "boundary-norm identity",
        "trial",
        "log10 relative error",
        &[Series {
            label: "|spectral - oracle| / oracle",
            points: &points,
        }],
    )?;
    Ok(out)
}

fn helicity_equivalence(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let statement = "A in C+- <=> mode support on e+- <=> curl A = +-|curl| A, invariant under the flow";
    let mut out = Outcome::default();
    let mut worst = 0.0f64;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (offset, sign) in [(1u64, 1i32), (2, -1)] {
        let state = pure_helicity_state(g, cfg.mmax, cfg.seed.wrapping_add(offset), sign)?;
        let scale = (l2_norm(state.a()).powi(2) + l2_norm(state.e()).powi(2)).sqrt();
        let push = |v: f64, worst: &mut f64| *worst = worst.max(v / scale);
        let minus = helicity_project_spec(&state.mode_function(), -sign);
        push(minus.parseval_norm_sq().sqrt(), &mut worst);
        push(l2_norm(&helicity_project(state.a(), -sign)), &mut worst);
        push(l2_norm(&helicity_project(state.e(), -sign)), &mut worst);
        let mut flow_points = Vec::new();
        for step in 0..8 {
            let t = 0.31 * step as f64;
            let s = maxwell_evolve(&state, t);
            let opp = (l2_norm(&helicity_project(&s.b(), -sign)).powi(2)
                + l2_norm(&helicity_project(s.a(), -sign)).powi(2)
                + l2_norm(&helicity_project(s.e(), -sign)).powi(2))
            .sqrt();
            push(opp, &mut worst);
            flow_points.push((t, log10_floor(opp / scale)));
        }
        series.push((format!("sign {sign:+}"), flow_points));
    }
    out.metric("worst_opposite_content", worst, statement);
    out.check(
        "five characterizations agree for both signs",
        worst < 1e-10,
        format!("worst relative opposite-helicity content {worst:.3e} (< 1e-10)"),
    );
    let plot_series: Vec<Series<'_>> = series
        .iter()
        .map(|(label, pts)| Series {
            label,
            points: pts,
        })
        .collect();
    line_plot(
        &dir.join("opposite_content_vs_t.svg"),
        "purity along the wave flow",
        "t",
        "log10 opposite-helicity content",
        &plot_series,
    )?;
    Ok(out)
}

fn maxwell_conservation(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let statement = "the bw-norm and the symplectic form are conserved by A'' = -curl curl A";
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut rng2 = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut cur =
        MaxwellState::from_mode_function(&synth::random_mode_function(g, cfg.mmax, &mut rng), 0.0)?;
    let mut other = MaxwellState::from_mode_function(
        &synth::random_mode_function(g, cfg.mmax, &mut rng2),
        0.0,
    )?;
    let bw0 = bw_norm_sq(&cur.b(), cur.e())?;
    let om0 = symplectic_form((cur.a(), cur.e()), (other.a(), other.e()))?;
    let mut bw_pts = Vec::new();
    let mut om_pts = Vec::new();
    let mut bw_drift = 0.0f64;
    let mut om_drift = 0.0f64;
    let sample = (cfg.steps / 50).max(1);
    for step in 1..=cfg.steps {
        cur = maxwell_evolve(&cur, cfg.dt);
        other = maxwell_evolve(&other, cfg.dt);
        if step % sample == 0 || step == cfg.steps {
            let b = (bw_norm_sq(&cur.b(), cur.e())? - bw0).abs() / bw0;
            let o = (symplectic_form((cur.a(), cur.e()), (other.a(), other.e()))? - om0).abs()
                / om0.abs().max(1e-300);
            bw_drift = bw_drift.max(b);
            om_drift = om_drift.max(o);
            let t = step as f64 * cfg.dt;
            bw_pts.push((t, log10_floor(b)));
            om_pts.push((t, log10_floor(o)));
        }
    }
    out.metric("bw_norm_drift", bw_drift, statement);
    out.metric("symplectic_drift", om_drift, statement);
    out.metric("steps", cfg.steps as f64, statement);
    out.check(
        "bw-norm drift stays at round-off",
        bw_drift < 1e-12,
        format!("{} steps of dt = {}: relative drift {bw_drift:.3e} (< 1e-12)", cfg.steps, cfg.dt),
    );
    out.check(
        "symplectic-form drift stays at round-off",
        om_drift < 1e-12,
        format!("relative drift {om_drift:.3e} (< 1e-12)"),
    );
    line_plot(
        &dir.join("invariant_drift_vs_t.svg"),
        "conserved quantities along the wave flow",
        "t",
        "log10 relative drift",
        &[
            Series {
                label: "bw-norm",
                points: &bw_pts,
            },
            Series {
                label: "symplectic form",
                points: &om_pts,
            },
        ],
    )?;
    Ok(out)
}

fn abelian_duality(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let statement = "A in C+- <=> the Poisson extension satisfies a' = -+ *da";
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let raw = synth::random_transverse(g, cfg.mmax, &mut rng);
    let samples = [0.3, 1.0, 2.0];
    let mut pass = true;
    for sign in [1i32, -1] {
        let a = helicity_project(&raw, sign);
        let good = duality_residual_abelian(&a, -sign, &samples);
        let bad = duality_residual_abelian(&a, sign, &samples);
        let tag = if sign > 0 { "plus" } else { "minus" };
        out.metric(&format!("residual_{tag}"), good.residual / good.scale, statement);
        out.metric(&format!("residual_{tag}_wrong_orientation"), bad.residual / bad.scale, statement);
        pass &= good.residual < 1e-12 * good.scale && bad.residual > 0.5 * bad.scale;
    }
    let mixed = duality_residual_abelian(&raw, 1, &samples);
    let mixed2 = duality_residual_abelian(&raw, -1, &samples);
    out.metric("residual_mixed_plus", mixed.residual / mixed.scale, statement);
    out.metric("residual_mixed_minus", mixed2.residual / mixed2.scale, statement);
    let mixed_flagged = mixed.residual > 0.3 * mixed.scale && mixed2.residual > 0.3 * mixed2.scale;
    out.check(
        "pure-helicity extensions are (anti-)self-dual, opposite orientation is rejected",
        pass,
        "residual < 1e-12 of scale in the matching orientation, > 0.5 of scale otherwise".into(),
    );
    out.check(
        "mixed-helicity data is flagged in both orientations",
        mixed_flagged,
        format!(
            "{:.2} / {:.2} of scale (> 0.3)",
            mixed.residual / mixed.scale,
            mixed2.residual / mixed2.scale
        ),
    );
    // residual profile in s, one sample at a time
    let plus = helicity_project(&raw, 1);
    let mut good_pts = Vec::new();
    let mut bad_pts = Vec::new();
    for i in 0..9 {
        let s = 0.25 + 0.25 * i as f64;
        let good = duality_residual_abelian(&plus, -1, &[s]);
        let bad = duality_residual_abelian(&plus, 1, &[s]);
        good_pts.push((s, log10_floor(good.residual / good.scale)));
        bad_pts.push((s, log10_floor(bad.residual / bad.scale)));
    }
    line_plot(
        &dir.join("duality_residual_vs_s.svg"),
        "anti-self-duality of a positive-helicity extension",
        "s",
        "log10 relative residual",
        &[
            Series {
                label: "a' + *da",
                points: &good_pts,
            },
            Series {
                label: "a' - *da (wrong orientation)",
                points: &bad_pts,
            },
        ],
    )?;
    Ok(out)
}

fn abelian_flow(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let statement = "A(t) = P+ A + e^{-2t|C|} P- A";
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let a = synth::random_transverse(g, cfg.mmax, &mut rng);
    let plus = helicity_project(&a, 1);
    let late = helicity_flow_abelian(&a, 20.0, 1)?;
    let limit_err = l2_norm(&late.minus(&plus)) / l2_norm(&a);
    let mut defect_pts = Vec::new();
    let mut defects = Vec::new();
    for i in 0..=12 {
        let t = 0.5 * i as f64;
        let d = l2_norm(&helicity_flow_abelian(&a, t, 1)?.minus(&plus));
        defects.push((t, d));
        defect_pts.push((t, log10_floor(d)));
    }
    // asymptotic rate from the last two samples, where only k_min survives
    let (t1, d1) = defects[defects.len() - 2];
    let (t2, d2) = defects[defects.len() - 1];
    let rate = (d1 / d2).ln() / (t2 - t1);
    let want = 2.0 * g.k_min();
    let rate_err = (rate - want).abs() / want;
    out.metric("limit_defect", limit_err, statement);
    out.metric("decay_rate", rate, statement);
    out.metric("decay_rate_expected", want, statement);
    out.check(
        "the flow limit is P+ A",
        limit_err < 1e-10,
        format!("relative defect at t = 20: {limit_err:.3e} (< 1e-10)"),
    );
    out.check(
        "the defect decays at the rate 2 |k_min|",
        rate_err < 0.01,
        format!("measured {rate:.5} vs {want} ({rate_err:.2e} relative, < 1e-2)"),
    );
    line_plot(
        &dir.join("defect_vs_t.svg"),
        "decay of the negative-helicity content",
        "t",
        "log10 || A(t) - P+ A ||",
        &[Series {
            label: "defect",
            points: &defect_pts,
        }],
    )?;
    Ok(out)
}

fn ym_oracle_abelian(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let p = solver_params(cfg);
    let statement = "u(1)-embedded data: layers equal e^{-s|C|} a and P(A) = <|C| a, a>";
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let v = synth::random_transverse(g, cfg.mmax, &mut rng);
    let a = LieField::from_abelian(&v, 0);
    let sol = ym_poisson_solve(&a, &p).map_err(|e| anyhow::anyhow!("solver failure: {e}"))?;
    let scale = lie::l2_norm(&a);
    let mut worst_layer = 0.0f64;
    let mut layer_pts = Vec::new();
    for (j, &sj) in sol.stack.s_grid().points().iter().enumerate() {
        let exact = poisson_extend_abelian(&v, sj)?;
        let got = sol.stack.layer(j).abelian_component(0);
        let err = l2_norm(&got.minus(&exact)) / scale;
        worst_layer = worst_layer.max(err);
        layer_pts.push((sj, log10_floor(err)));
    }
    let exact_action = poisson_action_abelian(&v);
    let action_err = (sol.action - exact_action).abs() / exact_action;
    out.metric("worst_layer_error", worst_layer, statement);
    out.metric("action_relative_error", action_err, statement);
    out.metric("solver_iterations", sol.history.len() as f64, statement);
    out.check(
        "layers match the closed-form extension",
        worst_layer < 1e-3,
        format!("worst relative layer error {worst_layer:.3e} (< 1e-3)"),
    );
    out.check(
        "the minimized action matches the quadratic form",
        action_err < 1e-4,
        format!("relative action error {action_err:.3e} (< 1e-4)"),
    );
    line_plot(
        &dir.join("layer_error_vs_s.svg"),
        "solver layers vs the closed-form extension",
        "s",
        "log10 relative error",
        &[Series {
            label: "|| a_h(s) - e^{-s|C|} a ||",
            points: &layer_pts,
        }],
    )?;
    Ok(out)
}

fn ym_gradient_check(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let p = solver_params(cfg);
    let statement = "d_u P(A) = -2 <u, a'(0)>";
    let mut out = Outcome::default();
    let a = small_connection(g, cfg, cfg.seed.wrapping_add(1));
    let sol = ym_poisson_solve(&a, &p).map_err(|e| anyhow::anyhow!("base solve: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut worst = 0.0f64;
    let mut pts = Vec::new();
    for d in 0..cfg.directions {
        let u = lie::random_lie_field(g, 1, cfg.mmax, &mut rng);
        let dp = action_gradient(&sol, &u)?;
        let eps = 1e-3 * lie::l2_norm(&a) / lie::l2_norm(&u);
        let mut ap = a.clone();
        ap.add_scaled(&u, eps);
        let mut am = a.clone();
        am.add_scaled(&u, -eps);
        let sp = ym_poisson_solve_from(&ap, &p, Some(&sol.stack))
            .map_err(|e| anyhow::anyhow!("perturbed solve: {e}"))?;
        let sm = ym_poisson_solve_from(&am, &p, Some(&sol.stack))
            .map_err(|e| anyhow::anyhow!("perturbed solve: {e}"))?;
        let fd = (sp.action - sm.action) / (2.0 * eps);
        let rel = (dp - fd).abs() / fd.abs().max(dp.abs());
        worst = worst.max(rel);
        pts.push((d as f64, log10_floor(rel)));
    }
    out.metric("worst_relative_error", worst, statement);
    out.metric("directions", cfg.directions as f64, statement);
    out.check(
        "boundary flux equals the re-minimized finite difference",
        worst < 1e-3,
        format!(
            "{} directions, worst relative error {worst:.3e} (< 1e-3)",
            cfg.directions
        ),
    );
    line_plot(
        &dir.join("gradient_error_per_direction.svg"),
        "envelope identity vs central differences",
        "direction",
        "log10 relative error",
        &[Series {
            label: "|dP - FD| / |FD|",
            points: &pts,
        }],
    )?;
    Ok(out)
}

fn ym_hessian_symmetry(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let p = solver_params(cfg);
    let statement = "<u(0), v'(0)> = <v(0), u'(0)> and the integral form equals -<u(0), v'(0)>";
    let mut out = Outcome::default();
    let a = small_connection(g, cfg, cfg.seed.wrapping_add(1));
    let sol = ym_poisson_solve(&a, &p).map_err(|e| anyhow::anyhow!("base solve: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let u = lie::random_lie_field(g, 1, cfg.mmax, &mut rng).scaled(cfg.amplitude);
    let v = lie::random_lie_field(g, 1, cfg.mmax, &mut rng).scaled(cfg.amplitude);
    let uext = variational_solve(&sol, &u, &p)?;
    let vext = variational_solve(&sol, &v, &p)?;
    let form = action_hessian_form(&sol, &uext, &vext, &p)?;
    let scale = form.integral.abs().max(form.boundary_uv.abs());
    let sym = (form.boundary_uv - form.boundary_vu).abs() / scale;
    let ibp = (form.integral + form.boundary_uv).abs() / scale;
    out.metric("boundary_uv", form.boundary_uv, statement);
    out.metric("boundary_vu", form.boundary_vu, statement);
    out.metric("integral_form", form.integral, statement);
    out.metric("relative_asymmetry", sym, statement);
    out.metric("integral_vs_boundary", ibp, statement);
    out.check(
        "the boundary pairing is symmetric",
        sym < 1e-5,
        format!("relative asymmetry {sym:.3e} (< 1e-5)"),
    );
    out.check(
        "the integral form equals minus the boundary pairing",
        ibp < 1e-5,
        format!("relative defect {ibp:.3e} (< 1e-5)"),
    );
    let hist: Vec<(f64, f64)> = sol
        .history
        .iter()
        .map(|r| (r.iter as f64, log10_floor(r.grad_norm)))
        .collect();
    line_plot(
        &dir.join("solver_convergence.svg"),
        "base extension solve",
        "iteration",
        "log10 gradient norm",
        &[Series {
            label: "||grad P||",
            points: &hist,
        }],
    )?;
    Ok(out)
}

fn instanton_residuals(_cfg: &Config, dir: &Path) -> Result<Outcome> {
    let statement = "the localized reference field is temporal-gauge, Euler-exact, and anti-self-dual";
    let mut out = Outcome::default();
    let inst = Instanton::new(0.8, [0.3, -0.2, 0.5, 0.0]);
    let pts = [
        ([0.7, -0.4, 0.9], 0.24),
        ([0.3 + 1e-7, -0.2, 0.5 - 1e-7], 0.4),
        ([-1.0, 0.6, 1.4], 0.04),
    ];
    let mut temporal = 0.0f64;
    let mut curv = 0.0f64;
    for (x, s) in pts {
        let jet = inst.eval(x, s);
        temporal = temporal.max(jet.temporal_defect());
        temporal = temporal.max((su2::qnorm(jet.q) - 1.0).abs());
        let b = jet.curvature();
        let closed = inst.curvature_closed(&jet);
        let mut scale = 0.0f64;
        let mut err = 0.0f64;
        for i in 0..3 {
            for a in 0..3 {
                err = err.max((b[i][a] - closed[i][a]).abs());
                scale = scale.max(closed[i][a].abs());
            }
        }
        curv = curv.max(err / scale);
    }
    let study = residual_refinement_study(
        &inst,
        &[[0.5, 0.0, -0.2], [-0.4, 0.6, 0.3], [1.0, 1.0, 0.5]],
        0.1,
        1.3,
        &[16, 32, 64],
    );
    let min_order = study
        .euler_orders
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let duality_dec = study.duality.windows(2).all(|w| w[1] < w[0]);
    out.metric("temporal_defect", temporal, statement);
    out.metric("curvature_vs_closed_form", curv, statement);
    out.metric("min_euler_order", min_order, statement);
    for (i, (&d, &h)) in study.duality.iter().zip(study.h.iter()).enumerate() {
        out.metric(&format!("duality_residual_level_{i}_h_{h:.4}"), d, statement);
    }
    out.check(
        "temporal gauge and unit quaternion hold pointwise",
        temporal < 1e-11,
        format!("worst defect {temporal:.2e} (< 1e-11)"),
    );
    out.check(
        "the differentiated curvature matches the closed form",
        curv < 1e-10,
        format!("worst relative error {curv:.2e} (< 1e-10)"),
    );
    out.check(
        "the discrete Euler residual converges at second order",
        min_order >= 1.8,
        format!("orders {:?} (>= 1.8)", study.euler_orders),
    );
    out.check(
        "the duality residual decreases under refinement",
        duality_dec,
        format!("residuals {:?}", study.duality),
    );
    let euler_pts: Vec<(f64, f64)> = study
        .h
        .iter()
        .zip(study.euler.iter())
        .map(|(&h, &e)| (h.log10(), log10_floor(e)))
        .collect();
    let dual_pts: Vec<(f64, f64)> = study
        .h
        .iter()
        .zip(study.duality.iter())
        .map(|(&h, &d)| (h.log10(), log10_floor(d)))
        .collect();
    line_plot(
        &dir.join("residual_vs_h.svg"),
        "refinement of the discretized residuals",
        "log10 h",
        "log10 residual",
        &[
            Series {
                label: "Euler",
                points: &euler_pts,
            },
            Series {
                label: "duality",
                points: &dual_pts,
            },
        ],
    )?;
    Ok(out)
}

fn h_flow_nonabelian(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let p = solver_params(cfg);
    let statement = "dA/dt = h_+(A) decreases P(A) and drives ||h_+|| to zero";
    let mut out = Outcome::default();
    let a = small_connection(g, cfg, cfg.seed.wrapping_add(1));
    // constraints satisfied by the h-fields at the starting point
    let (hp, _) = h_field(&a, 1, &p).map_err(|e| anyhow::anyhow!("h+: {e}"))?;
    let (hm, _) = h_field(&a, -1, &p).map_err(|e| anyhow::anyhow!("h-: {e}"))?;
    let hscale = lie::l2_norm(&hp).max(lie::l2_norm(&hm));
    let dstar = lie::l2_norm(&covariant_d_star(&a, &hp)?)
        .max(lie::l2_norm(&covariant_d_star(&a, &hm)?))
        / (g.k_min() * hscale);
    let cross = lie::l2_inner(&hp, &hm)?.abs() / (hscale * hscale);
    let h_tol = 1e-4 * g.k_min() * lie::l2_norm(&a);
    let flow = h_flow(&a, 1, cfg.t_end, h_tol, &p).map_err(|e| anyhow::anyhow!("flow: {e}"))?;
    let descending = flow
        .actions
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-9 * flow.actions[0]);
    let final_h = *flow.h_norms.last().unwrap();
    out.metric("dstar_h_relative", dstar, statement);
    out.metric("h_plus_minus_overlap", cross, statement);
    out.metric("flow_steps", flow.times.len() as f64, statement);
    out.metric("final_h_norm", final_h, statement);
    out.metric("final_action", *flow.actions.last().unwrap(), statement);
    out.check(
        "h-fields are horizontal and mutually orthogonal",
        dstar < 1e-4 && cross < 1e-4,
        format!("d_A* h {dstar:.3e}, <h+, h-> {cross:.3e} (both < 1e-4 at this resolution)"),
    );
    out.check(
        "the action is non-increasing along the flow",
        descending,
        format!("{} steps over t in [0, {}]", flow.times.len(), cfg.t_end),
    );
    out.check(
        "the flow reaches the stratum h_+ = 0",
        flow.converged,
        format!("final ||h|| {final_h:.3e} (tolerance {h_tol:.3e})"),
    );
    let action_pts: Vec<(f64, f64)> = flow
        .times
        .iter()
        .zip(flow.actions.iter())
        .map(|(&t, &s)| (t, s))
        .collect();
    let h_pts: Vec<(f64, f64)> = flow
        .times
        .iter()
        .zip(flow.h_norms.iter())
        .map(|(&t, &h)| (t, log10_floor(h)))
        .collect();
    line_plot(
        &dir.join("action_vs_t.svg"),
        "action along the helicity flow",
        "t",
        "P(A(t))",
        &[Series {
            label: "action",
            points: &action_pts,
        }],
    )?;
    line_plot(
        &dir.join("h_norm_vs_t.svg"),
        "residual along the helicity flow",
        "t",
        "log10 ||h_+(A(t))||",
        &[Series {
            label: "||h||",
            points: &h_pts,
        }],
    )?;
    Ok(out)
}

fn integral_norm_calibration(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let statement = "the double-integral norm is a constant multiple of the spectral bw-norm";
    let mut out = Outcome::default();
    let mut pairs = Vec::new();
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial as u64));
        let modes = synth::random_mode_function(g, cfg.mmax, &mut rng);
        let state = MaxwellState::from_mode_function(&modes, 0.0)?;
        let spectral = bw_norm_sq(&state.b(), state.e())?;
        let raw = bw_norm_integral_raw(&state.b(), state.e(), g.n())?;
        pairs.push((spectral, raw));
    }
    let c = calibrate_integral_constant(&pairs);
    let mut spread = 0.0f64;
    let mut pts = Vec::new();
    for (trial, (s, r)) in pairs.iter().enumerate() {
        let rel = (s - c * r).abs() / s;
        spread = spread.max(rel);
        pts.push((trial as f64, rel));
    }
    out.metric("calibration_constant", c, statement);
    out.metric("worst_relative_deviation", spread, statement);
    out.metric("trials", cfg.trials as f64, statement);
    out.check(
        "one constant aligns the quadrature with the spectral norm",
        spread < 0.25,
        format!(
            "{} states, worst relative deviation {spread:.3} after calibration (< 0.25; the midpoint quadrature of the singular kernel sets the floor)",
            cfg.trials
        ),
    );
    line_plot(
        &dir.join("calibration_deviation.svg"),
        "calibrated quadrature vs spectral norm",
        "trial",
        "relative deviation",
        &[Series {
            label: "|spectral - c * integral| / spectral",
            points: &pts,
        }],
    )?;
    Ok(out)
}

fn convexity_probe(cfg: &Config, dir: &Path) -> Result<Outcome> {
    let g = grid(cfg)?;
    let p = solver_params(cfg);
    let statement = "Rayleigh-quotient samples of the second variation of P near A = 0 (data only)";
    let mut out = Outcome::default();
    let a = small_connection(g, cfg, cfg.seed.wrapping_add(1));
    let sol = ym_poisson_solve(&a, &p).map_err(|e| anyhow::anyhow!("base solve: {e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut pts = Vec::new();
    let mut qmin = f64::INFINITY;
    let mut qmax = f64::NEG_INFINITY;
    for d in 0..cfg.directions {
        let u = lie::random_lie_field(g, 1, cfg.mmax, &mut rng);
        let uext = variational_solve(&sol, &u, &p)?;
        let form = action_hessian_form(&sol, &uext, &uext, &p)?;
        let q = form.integral / lie::l2_norm(&u).powi(2);
        qmin = qmin.min(q);
        qmax = qmax.max(q);
        out.metric(&format!("rayleigh_quotient_{d}"), q, statement);
        pts.push((d as f64, q));
    }
    out.metric("rayleigh_min", qmin, statement);
    out.metric("rayleigh_max", qmax, statement);
    out.check(
        "all variational extensions solved",
        true,
        format!(
            "{} directions sampled; quotients in [{qmin:.4}, {qmax:.4}] (reported as data, no pass threshold)",
            cfg.directions
        ),
    );
    line_plot(
        &dir.join("rayleigh_quotients.svg"),
        "second-variation samples near the flat connection",
        "direction",
        "Q(u) / ||u||^2",
        &[Series {
            label: "Rayleigh quotient",
            points: &pts,
        }],
    )?;
    Ok(out)
}
