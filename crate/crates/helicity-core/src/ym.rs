//! The non-abelian core: Yang-Mills-Poisson solves by preconditioned
//! limited-memory quasi-Newton minimization of the discrete action,
//! variational (Jacobi) solves, action derivatives, h-fields and their flows,
//! the horizontal/vertical split, and the Riemannian metric.
//!
//! Discretization: boundary layer clamped, natural (Neumann) condition at
//! s = S through the variational formulation, piecewise-quadratic elements in
//! s with Gauss quadrature. The inner preconditioner is the exact inverse of
//! the abelian (A = 0) Hessian, assembled per Fourier mode.

use nalgebra::{Cholesky, DMatrix, Dyn};
use ndarray::Array3;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{fft3, TorusGrid};
use crate::halfspace::{reinterpret, HalfSpaceField};
use crate::lbfgs::{self, IterRecord, LbfgsParams, Objective};
use crate::lie::{
    self, bracket_wedge, covariant_d, covariant_d_star, curvature3, LieField,
};
use crate::sgrid::{assemble_matrices, p2_rule, spline_tail_integral_weights, QuadRule, SGrid};

#[derive(Clone, Debug)]
pub struct SolverParams {
    /// number of s-grid nodes (M)
    pub s_nodes: usize,
    /// S = s_max_factor / k_min
    pub s_max_factor: f64,
    /// first interval width as a fraction of S
    pub h0_frac: f64,
    pub lbfgs: LbfgsParams,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// 2/3-rule filtering of nonlinear products (off by default: the exact
    /// lattice adjointness identities hold without it, and the test fields
    /// are band-limited so their products do not alias)
    pub dealias: bool,
    /// largest grid n for the dense covariant-Laplacian eigensolve
    pub eigensolve_cap: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            s_nodes: 64,
            s_max_factor: 30.0,
            h0_frac: 1.0 / 3000.0,
            lbfgs: LbfgsParams::default(),
            cg_tol: 1e-11,
            cg_max_iter: 4000,
            dealias: false,
            eigensolve_cap: 8,
        }
    }
}

impl SolverParams {
    pub fn s_grid(&self, grid: TorusGrid) -> Result<SGrid> {
        let s_max = self.s_max_factor / grid.k_min();
        SGrid::geometric(self.s_nodes, s_max, self.h0_frac * s_max)
    }
}

fn curvature(a: &LieField, deal: bool) -> Result<LieField> {
    if !deal {
        return curvature3(a);
    }
    let af = lie::dealias(a);
    let mut b = lie::d(a)?;
    b.add_scaled(&lie::dealias(&bracket_wedge(&af, &af)?), 0.5);
    Ok(b)
}

/// Gradient kernel of ||b||^2 with respect to the connection: d*_a b, with
/// products filtered consistently when dealiasing is on.
fn curvature_gradient(a: &LieField, b: &LieField, deal: bool) -> Result<LieField> {
    if !deal {
        return covariant_d_star(a, b);
    }
    let af = lie::dealias(a);
    let bf = lie::dealias(b);
    let mut out = lie::d_star(b)?;
    let hook = crate::lie::bracket_hook(&af, &reinterpret(&bf, 2))?;
    out.add_scaled(&lie::dealias(&hook), 1.0);
    Ok(out)
}

// ---------- packing ----------

fn field_len(grid: TorusGrid) -> usize {
    9 * grid.points()
}

fn pack_field(f: &LieField, out: &mut [f64]) {
    let npts = f.grid().points();
    let mut o = 0;
    for c in 0..3 {
        for a in 0..3 {
            out[o..o + npts].copy_from_slice(f.comp(c, a).as_slice().unwrap());
            o += npts;
        }
    }
}

fn unpack_field(x: &[f64], f: &mut LieField) {
    let npts = f.grid().points();
    let mut o = 0;
    for c in 0..3 {
        for a in 0..3 {
            f.comp_mut(c, a)
                .as_slice_mut()
                .unwrap()
                .copy_from_slice(&x[o..o + npts]);
            o += npts;
        }
    }
}

// ---------- abelian-Hessian preconditioner ----------

struct SPrecond {
    grid: TorusGrid,
    active: Vec<usize>,
    chols: Vec<Cholesky<f64, Dyn>>,
    /// index into `chols` per grid mode (one factor per distinct |k|^2)
    kappa_of_mode: Vec<usize>,
    zero_kappa: usize,
    scale: f64,
}

impl SPrecond {
    fn new(grid: TorusGrid, rule: &QuadRule, m: usize, active: &[usize]) -> SPrecond {
        let (k_full, m_full) = assemble_matrices(rule, m);
        let na = active.len();
        let restrict = |mat: &DMatrix<f64>| -> DMatrix<f64> {
            DMatrix::from_fn(na, na, |i, j| mat[(active[i], active[j])])
        };
        let k_res = restrict(&k_full);
        let m_res = restrict(&m_full);
        let n = grid.n();
        let mut kappas: Vec<f64> = vec![0.0];
        let mut kappa_of_mode = vec![0usize; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let kn = grid.wavenumber((i, j, l));
                    let kap = kn * kn;
                    let pos = kappas
                        .iter()
                        .position(|&v| (v - kap).abs() <= 1e-9 * kap.max(1.0));
                    let idx = match pos {
                        Some(p) => p,
                        None => {
                            kappas.push(kap);
                            kappas.len() - 1
                        }
                    };
                    kappa_of_mode[(i * n + j) * n + l] = idx;
                }
            }
        }
        let chols = kappas
            .iter()
            .map(|&kap| {
                let mat = &k_res + &m_res * kap;
                Cholesky::new(mat).expect("K + kappa M is SPD on the active set")
            })
            .collect();
        SPrecond {
            grid,
            active: active.to_vec(),
            chols,
            kappa_of_mode,
            zero_kappa: 0,
            scale: 1.0 / (2.0 * grid.cell_volume()),
        }
    }

    /// Apply the inverse abelian Hessian to a packed layer-stack gradient.
    fn apply(&self, g: &[f64], out: &mut [f64]) {
        let grid = self.grid;
        let n = grid.n();
        let npts = grid.points();
        let na = self.active.len();
        let flen = field_len(grid);
        // forward FFT of every (layer, comp, lie) scalar
        let mut spec: Vec<Array3<Complex64>> = Vec::with_capacity(na * 9);
        for j in 0..na {
            for ca in 0..9 {
                let src = &g[j * flen + ca * npts..j * flen + (ca + 1) * npts];
                let mut arr = Array3::from_shape_fn((n, n, n), |(x, y, z)| {
                    Complex64::new(src[(x * n + y) * n + z], 0.0)
                });
                fft3(&mut arr, false);
                spec.push(arr);
            }
        }
        // per-mode solves; columns: (comp, lie, re/im)
        let mut rhs_t = DMatrix::<f64>::zeros(na, 18);
        let mut rhs_l = DMatrix::<f64>::zeros(na, 18);
        for i in 0..n {
            for jj in 0..n {
                for l in 0..n {
                    let mode = (i * n + jj) * n + l;
                    let kap_idx = self.kappa_of_mode[mode];
                    let k = grid.wavevector_deriv((i, jj, l));
                    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                    let khat = if kn > 0.0 {
                        [k[0] / kn, k[1] / kn, k[2] / kn]
                    } else {
                        [0.0; 3]
                    };
                    for j in 0..na {
                        for a in 0..3 {
                            let v: [Complex64; 3] = std::array::from_fn(|c| {
                                spec[j * 9 + c * 3 + a][(i, jj, l)]
                            });
                            let dot = v[0] * khat[0] + v[1] * khat[1] + v[2] * khat[2];
                            for c in 0..3 {
                                let lg = dot * khat[c];
                                let tr = v[c] - lg;
                                rhs_t[(j, (c * 3 + a) * 2)] = tr.re;
                                rhs_t[(j, (c * 3 + a) * 2 + 1)] = tr.im;
                                rhs_l[(j, (c * 3 + a) * 2)] = lg.re;
                                rhs_l[(j, (c * 3 + a) * 2 + 1)] = lg.im;
                            }
                        }
                    }
                    let sol_t = self.chols[kap_idx].solve(&rhs_t);
                    let sol_l = self.chols[self.zero_kappa].solve(&rhs_l);
                    for j in 0..na {
                        for a in 0..3 {
                            for c in 0..3 {
                                let col = (c * 3 + a) * 2;
                                spec[j * 9 + c * 3 + a][(i, jj, l)] = Complex64::new(
                                    sol_t[(j, col)] + sol_l[(j, col)],
                                    sol_t[(j, col + 1)] + sol_l[(j, col + 1)],
                                ) * self.scale;
                            }
                        }
                    }
                }
            }
        }
        // inverse FFT back
        for j in 0..na {
            for ca in 0..9 {
                let mut arr = spec[j * 9 + ca].clone();
                fft3(&mut arr, true);
                let dst = &mut out[j * flen + ca * npts..j * flen + (ca + 1) * npts];
                for x in 0..n {
                    for y in 0..n {
                        for z in 0..n {
                            dst[(x * n + y) * n + z] = arr[(x, y, z)].re;
                        }
                    }
                }
            }
        }
    }
}

// ---------- the discrete action objective ----------

struct YmObjective {
    boundary: LieField,
    s: SGrid,
    rule: QuadRule,
    /// indices of free nodes (all but the boundary; the far end is free —
    /// the natural boundary condition a'(S) = 0 emerges variationally)
    active: Vec<usize>,
    layers: Vec<LieField>,
    precond: SPrecond,
    dealias: bool,
    pub neval: usize,
}

impl YmObjective {
    fn new(boundary: &LieField, s: SGrid, params: &SolverParams) -> YmObjective {
        let grid = boundary.grid();
        let m = s.len();
        let rule = p2_rule(&s);
        let active: Vec<usize> = (1..m).collect();
        let precond = SPrecond::new(grid, &rule, m, &active);
        let layers = vec![LieField::zeros(grid, 1).unwrap(); m];
        let mut obj = YmObjective {
            boundary: boundary.clone(),
            s,
            rule,
            active,
            layers,
            precond,
            dealias: params.dealias,
            neval: 0,
        };
        obj.layers[0] = obj.boundary.clone();
        obj
    }

    fn dim(&self) -> usize {
        self.active.len() * field_len(self.boundary.grid())
    }

    fn set_from(&mut self, x: &[f64]) {
        let flen = field_len(self.boundary.grid());
        for (ai, &j) in self.active.iter().enumerate() {
            unpack_field(&x[ai * flen..(ai + 1) * flen], &mut self.layers[j]);
        }
    }

    fn pack_into(&self, layers: &[LieField], x: &mut [f64]) {
        let flen = field_len(self.boundary.grid());
        for (ai, &j) in self.active.iter().enumerate() {
            pack_field(&layers[j], &mut x[ai * flen..(ai + 1) * flen]);
        }
    }

    /// Action and L2-convention gradient fields at every node.
    fn action_and_gradient(&self) -> Result<(f64, Vec<LieField>)> {
        let grid = self.boundary.grid();
        let m = self.layers.len();
        let mut grads = vec![LieField::zeros(grid, 1)?; m];
        let mut action = 0.0;
        for el in &self.rule.elems {
            for g in &el.gauss {
                let mut a = LieField::zeros(grid, 1)?;
                let mut da = LieField::zeros(grid, 1)?;
                for (li, &ni) in el.nodes.iter().enumerate() {
                    a.add_scaled(&self.layers[ni], g.phi[li]);
                    da.add_scaled(&self.layers[ni], g.dphi[li]);
                }
                let b = curvature(&a, self.dealias)?;
                let dstar = curvature_gradient(&a, &b, self.dealias)?;
                action += g.w * (lie::l2_inner(&da, &da)? + lie::l2_inner(&b, &b)?);
                for (li, &ni) in el.nodes.iter().enumerate() {
                    grads[ni].add_scaled(&da, 2.0 * g.w * g.dphi[li]);
                    grads[ni].add_scaled(&dstar, 2.0 * g.w * g.phi[li]);
                }
            }
        }
        Ok((action, grads))
    }
}

impl Objective for YmObjective {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.neval += 1;
        self.set_from(x);
        let (action, grads) = self.action_and_gradient().expect("valid stack");
        let vol = self.boundary.grid().cell_volume();
        let flen = field_len(self.boundary.grid());
        for (ai, &j) in self.active.iter().enumerate() {
            pack_field(&grads[j].scaled(vol), &mut grad[ai * flen..(ai + 1) * flen]);
        }
        action
    }

    fn precondition(&mut self, g: &[f64], out: &mut [f64]) {
        self.precond.apply(g, out);
    }
}

// ---------- solutions ----------

pub struct YmSolution {
    pub stack: HalfSpaceField,
    /// a'(0) from the discrete boundary flux -(1/2) dS/d(layer 0); this is the
    /// exact derivative of the discrete action with respect to the boundary
    pub boundary_slope: LieField,
    pub action: f64,
    pub euler_residual: f64,
    pub history: Vec<IterRecord>,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug)]
pub struct SolveFailure {
    pub message: String,
    pub history: Vec<IterRecord>,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<SolveFailure> for Error {
    fn from(e: SolveFailure) -> Error {
        Error::LinearSolve(e.message)
    }
}

/// Closed-form abelian initialization: e^{-s|C|} applied per Lie coefficient.
pub fn abelian_initial_stack(a: &LieField, s: &SGrid) -> Result<Vec<LieField>> {
    let grid = a.grid();
    let mut layers = Vec::with_capacity(s.len());
    for &sj in s.points() {
        let mut layer = LieField::zeros(grid, 1)?;
        for lie_dir in 0..3 {
            let v = a.abelian_component(lie_dir);
            let ext = crate::abelian::poisson_extend_abelian(&v, sj)?;
            for c in 0..3 {
                *layer.comp_mut(c, lie_dir) = ext.comp(c).clone();
            }
        }
        layers.push(layer);
    }
    Ok(layers)
}

pub fn ym_poisson_solve(
    a: &LieField,
    params: &SolverParams,
) -> std::result::Result<YmSolution, SolveFailure> {
    ym_poisson_solve_from(a, params, None)
}

pub fn ym_poisson_solve_from(
    a: &LieField,
    params: &SolverParams,
    init: Option<&HalfSpaceField>,
) -> std::result::Result<YmSolution, SolveFailure> {
    let grid = a.grid();
    let s = params.s_grid(grid).map_err(|e| SolveFailure {
        message: e.to_string(),
        history: vec![],
    })?;
    let mut obj = YmObjective::new(a, s.clone(), params);
    let init_layers = match init {
        Some(stack) if stack.layers().len() == s.len() => {
            let mut layers: Vec<LieField> = stack.layers().to_vec();
            layers[0] = a.clone();
            layers
        }
        _ => abelian_initial_stack(a, &s).map_err(|e| SolveFailure {
            message: e.to_string(),
            history: vec![],
        })?,
    };
    let mut x0 = vec![0.0; obj.dim()];
    obj.pack_into(&init_layers, &mut x0);
    let result = lbfgs::minimize(&mut obj, x0, &params.lbfgs);
    obj.set_from(&result.x);
    let layers = obj.layers.clone();
    let solution = finalize_solution(
        &obj,
        layers,
        result.f,
        result.history.clone(),
        result.grad_norm,
        result.converged,
    )
    .map_err(|e| SolveFailure {
        message: e.to_string(),
        history: result.history.clone(),
    })?;
    if !result.converged {
        return Err(SolveFailure {
            message: format!(
                "no convergence in {} iterations: ||g|| = {:.3e}",
                params.lbfgs.max_iter, result.grad_norm
            ),
            history: result.history,
        });
    }
    Ok(solution)
}

fn finalize_solution(
    obj: &YmObjective,
    layers: Vec<LieField>,
    action: f64,
    history: Vec<IterRecord>,
    grad_norm: f64,
    converged: bool,
) -> Result<YmSolution> {
    let m = layers.len();
    // a''(s_j) = d*_{a_j} b_j exactly at nodes along the Euler equation;
    // reconstruct a'(s_j) = -(integral of a'' from s_j to S) by cubic-spline
    // quadrature (the natural condition gives a'(S) = 0).
    let rhs: Vec<LieField> = layers
        .iter()
        .map(|aj| curvature_gradient(aj, &curvature(aj, obj.dealias)?, obj.dealias))
        .collect::<Result<Vec<_>>>()?;
    let weights = spline_tail_integral_weights(obj.s.points());
    let grid = obj.boundary.grid();
    let mut dlayers = Vec::with_capacity(m);
    for j in 0..m {
        let mut d = LieField::zeros(grid, 1)?;
        for i in 0..m {
            let w = weights[j][i];
            if w != 0.0 {
                d.add_scaled(&rhs[i], -w);
            }
        }
        dlayers.push(d);
    }
    // boundary flux: exact derivative of the discrete action wrt layer 0
    // (obj.layers already hold the final iterate)
    let (_, grads) = obj.action_and_gradient()?;
    let boundary_slope = grads[0].scaled(-0.5);
    let stack = HalfSpaceField::new(obj.s.clone(), layers)?.with_derivatives(dlayers)?;
    let euler_residual = crate::halfspace::ym_poisson_residual(&stack)?;
    Ok(YmSolution {
        stack,
        boundary_slope,
        action,
        euler_residual,
        history,
        grad_norm,
        converged,
    })
}

/// Directional derivative of the Poisson action: dP(A)[u] = -2 <u, a'(0)>.
pub fn action_gradient(sol: &YmSolution, u: &LieField) -> Result<f64> {
    Ok(-2.0 * lie::l2_inner(u, &sol.boundary_slope)?)
}

/// a'(0) by a one-sided second-order difference at the boundary (cross-check
/// of the flux value; the flux is what enters the derivative identities).
pub fn boundary_slope_fd(stack: &HalfSpaceField) -> LieField {
    let pts = stack.s_grid().points();
    let (x0, x1, x2) = (pts[0], pts[1], pts[2]);
    let d0 = (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2));
    let d1 = (x0 - x2) / ((x1 - x0) * (x1 - x2));
    let d2 = (x0 - x1) / ((x2 - x0) * (x2 - x1));
    let mut out = stack.layer(0).scaled(d0);
    out.add_scaled(stack.layer(1), d1);
    out.add_scaled(stack.layer(2), d2);
    out
}

// ---------- variational (linearized) solves ----------

pub struct VariationalExtension {
    pub stack: HalfSpaceField,
    /// u'(0) as a discrete flux, consistent with the Hessian identities
    pub boundary_flux: LieField,
    pub cg_iterations: usize,
}

struct HessianContext {
    grid: TorusGrid,
    rule: QuadRule,
    /// cached (a, b) at every Gauss point, flattened over elements
    gauss: Vec<(LieField, LieField)>,
    m: usize,
    dealias: bool,
}

impl HessianContext {
    fn new(sol: &YmSolution, dealias: bool) -> Result<HessianContext> {
        let stack = &sol.stack;
        let grid = stack.grid();
        let rule = stack.rule().clone();
        let mut gauss = Vec::new();
        for (ei, el) in rule.elems.iter().enumerate() {
            for gi in 0..el.gauss.len() {
                let (a, _) = stack.at_gauss(ei, gi);
                let b = curvature(&a, dealias)?;
                gauss.push((a, b));
            }
        }
        Ok(HessianContext {
            grid,
            rule,
            gauss,
            m: stack.layers().len(),
            dealias,
        })
    }

    /// (H u)_n = 2 sum_g w (dphi_n u'(g) + phi_n (d*_a d_a u(g) + [u(g) -| b]))
    /// in the L2 field convention, for a full node stack u.
    fn apply(&self, u: &[LieField]) -> Result<Vec<LieField>> {
        let mut out = vec![LieField::zeros(self.grid, 1)?; self.m];
        let mut gp_idx = 0;
        for el in &self.rule.elems {
            for g in &el.gauss {
                let (a, b) = &self.gauss[gp_idx];
                gp_idx += 1;
                let mut ug = LieField::zeros(self.grid, 1)?;
                let mut dug = LieField::zeros(self.grid, 1)?;
                for (li, &ni) in el.nodes.iter().enumerate() {
                    ug.add_scaled(&u[ni], g.phi[li]);
                    dug.add_scaled(&u[ni], g.dphi[li]);
                }
                let dau = covariant_d(a, &ug)?;
                let mut term = covariant_d_star(a, &dau)?;
                term.add_scaled(&crate::lie::bracket_hook(&ug, b)?, 1.0);
                let _ = self.dealias;
                for (li, &ni) in el.nodes.iter().enumerate() {
                    out[ni].add_scaled(&dug, 2.0 * g.w * g.dphi[li]);
                    out[ni].add_scaled(&term, 2.0 * g.w * g.phi[li]);
                }
            }
        }
        Ok(out)
    }

    /// Q(u, v) = sum_g w [ <u', v'> + <d_a u, d_a v> + <[u ^ v], b> ]
    /// for full node stacks (the symmetric Hessian form, one half of the
    /// second derivative of P).
    fn form(&self, u: &[LieField], v: &[LieField]) -> Result<f64> {
        let mut total = 0.0;
        let mut gp_idx = 0;
        for el in &self.rule.elems {
            for g in &el.gauss {
                let (a, b) = &self.gauss[gp_idx];
                gp_idx += 1;
                let mut ug = LieField::zeros(self.grid, 1)?;
                let mut dug = LieField::zeros(self.grid, 1)?;
                let mut vg = LieField::zeros(self.grid, 1)?;
                let mut dvg = LieField::zeros(self.grid, 1)?;
                for (li, &ni) in el.nodes.iter().enumerate() {
                    ug.add_scaled(&u[ni], g.phi[li]);
                    dug.add_scaled(&u[ni], g.dphi[li]);
                    vg.add_scaled(&v[ni], g.phi[li]);
                    dvg.add_scaled(&v[ni], g.dphi[li]);
                }
                let dau = covariant_d(a, &ug)?;
                let dav = covariant_d(a, &vg)?;
                let wedge = bracket_wedge(&ug, &vg)?;
                total += g.w
                    * (lie::l2_inner(&dug, &dvg)?
                        + lie::l2_inner(&dau, &dav)?
                        + lie::l2_inner(&wedge, b)?);
            }
        }
        Ok(total)
    }
}

/// Solve the variational equation u'' = d*_a d_a u + [u -| b] with u(0) = u0
/// and u(S) = 0, by preconditioned CG on the Galerkin system along the
/// converged extension `sol`.
pub fn variational_solve(
    sol: &YmSolution,
    u0: &LieField,
    params: &SolverParams,
) -> Result<VariationalExtension> {
    let stack = &sol.stack;
    let grid = stack.grid();
    u0.grid().same_as(&grid)?;
    let m = stack.layers().len();
    let ctx = HessianContext::new(sol, params.dealias)?;
    let active: Vec<usize> = (1..m - 1).collect();
    let precond = SPrecond::new(grid, stack.rule(), m, &active);
    let flen = field_len(grid);
    let vol = grid.cell_volume();
    // rhs = -(H E(u0)) on active nodes
    let mut ext = vec![LieField::zeros(grid, 1)?; m];
    ext[0] = u0.clone();
    let h_ext = ctx.apply(&ext)?;
    let mut rhs = vec![0.0; active.len() * flen];
    for (ai, &j) in active.iter().enumerate() {
        pack_field(&h_ext[j].scaled(-vol), &mut rhs[ai * flen..(ai + 1) * flen]);
    }
    let mut work = vec![LieField::zeros(grid, 1)?; m];
    let mut apply = |x: &[f64], out: &mut [f64]| {
        for (ai, &j) in active.iter().enumerate() {
            unpack_field(&x[ai * flen..(ai + 1) * flen], &mut work[j]);
        }
        work[0] = LieField::zeros(grid, 1).unwrap();
        work[m - 1] = LieField::zeros(grid, 1).unwrap();
        let h = ctx.apply(&work).expect("hessian apply");
        for (ai, &j) in active.iter().enumerate() {
            pack_field(&h[j].scaled(vol), &mut out[ai * flen..(ai + 1) * flen]);
        }
    };
    let mut pre = |r: &[f64], out: &mut [f64]| precond.apply(r, out);
    let (x, iters, _res) = lbfgs::pcg(&mut apply, &mut pre, &rhs, params.cg_tol, params.cg_max_iter)
        .map_err(Error::LinearSolve)?;
    let mut layers = vec![LieField::zeros(grid, 1)?; m];
    layers[0] = u0.clone();
    for (ai, &j) in active.iter().enumerate() {
        unpack_field(&x[ai * flen..(ai + 1) * flen], &mut layers[j]);
    }
    // discrete flux u'(0) = -(1/2) (H U)_0
    let h_full = ctx.apply(&layers)?;
    let boundary_flux = h_full[0].scaled(-0.5);
    let stack_u = HalfSpaceField::new(stack.s_grid().clone(), layers)?;
    Ok(VariationalExtension {
        stack: stack_u,
        boundary_flux,
        cg_iterations: iters,
    })
}

pub struct HessianForm {
    /// integral form: sum of <u', v'> + <d_a u, d_a v> + <[u ^ v], b>
    pub integral: f64,
    /// boundary form <u(0), v'(0)>
    pub boundary_uv: f64,
    /// boundary form <v(0), u'(0)>
    pub boundary_vu: f64,
}

/// (1/2) d_v d_u P(A) both ways: the integral form equals minus either
/// boundary form, and the two boundary forms agree by symmetry.
pub fn action_hessian_form(
    sol: &YmSolution,
    uext: &VariationalExtension,
    vext: &VariationalExtension,
    params: &SolverParams,
) -> Result<HessianForm> {
    let ctx = HessianContext::new(sol, params.dealias)?;
    let integral = ctx.form(uext.stack.layers(), vext.stack.layers())?;
    let boundary_uv = lie::l2_inner(uext.stack.boundary(), &vext.boundary_flux)?;
    let boundary_vu = lie::l2_inner(vext.stack.boundary(), &uext.boundary_flux)?;
    Ok(HessianForm {
        integral,
        boundary_uv,
        boundary_vu,
    })
}

// ---------- h fields and flows ----------

/// h_sign(A) = a'(0) + sign * (*B), with a'(0) the discrete boundary flux.
pub fn h_field(
    a: &LieField,
    sign: i32,
    params: &SolverParams,
) -> std::result::Result<(LieField, YmSolution), SolveFailure> {
    h_field_from(a, sign, params, None)
}

pub fn h_field_from(
    a: &LieField,
    sign: i32,
    params: &SolverParams,
    init: Option<&HalfSpaceField>,
) -> std::result::Result<(LieField, YmSolution), SolveFailure> {
    let sol = ym_poisson_solve_from(a, params, init)?;
    let b = curvature(a, params.dealias).map_err(|e| SolveFailure {
        message: e.to_string(),
        history: vec![],
    })?;
    let star_b = reinterpret(&b, 1);
    let mut h = sol.boundary_slope.clone();
    h.add_scaled(&star_b, sign.signum() as f64);
    Ok((h, sol))
}

pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub actions: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub final_field: LieField,
    pub converged: bool,
}

/// Explicit adaptive (Heun) integration of dA/dt = h_sign(A), warm-starting
/// every Poisson solve from the previous extension. Terminates when
/// ||h|| <= h_tol or t_end is reached.
pub fn h_flow(
    a0: &LieField,
    sign: i32,
    t_end: f64,
    h_tol: f64,
    params: &SolverParams,
) -> std::result::Result<FlowTrajectory, SolveFailure> {
    let mut a = a0.clone();
    let mut t = 0.0;
    let mut dt: f64 = 0.2;
    let (mut h, mut sol) = h_field(&a, sign, params)?;
    let mut times = vec![0.0];
    let mut actions = vec![sol.action];
    let mut h_norms = vec![lie::l2_norm(&h)];
    let mut converged = *h_norms.last().unwrap() <= h_tol;
    while !converged && t < t_end {
        let dt_eff = dt.min(t_end - t);
        // Heun predictor-corrector
        let mut a_pred = a.clone();
        a_pred.add_scaled(&h, dt_eff);
        let (h_pred, sol_pred) = h_field_from(&a_pred, sign, params, Some(&sol.stack))?;
        let err = lie::l2_norm(&h_pred.minus(&h)) * dt_eff * 0.5;
        let scale = lie::l2_norm(&h).max(1e-300) * dt_eff;
        if err > 0.25 * scale && dt_eff > 1e-3 {
            dt *= 0.5;
            let _ = sol_pred;
            continue;
        }
        let mut a_new = a.clone();
        a_new.add_scaled(&h, 0.5 * dt_eff);
        a_new.add_scaled(&h_pred, 0.5 * dt_eff);
        let (h_new, sol_new) = h_field_from(&a_new, sign, params, Some(&sol_pred.stack))?;
        a = a_new;
        t += dt_eff;
        h = h_new;
        sol = sol_new;
        times.push(t);
        actions.push(sol.action);
        h_norms.push(lie::l2_norm(&h));
        converged = *h_norms.last().unwrap() <= h_tol;
        if err < 0.05 * scale {
            dt *= 1.5;
        }
    }
    Ok(FlowTrajectory {
        times,
        actions,
        h_norms,
        final_field: a,
        converged,
    })
}

// ---------- horizontal / vertical split ----------

/// Solve d_A* d_A lambda = d_A* w by preconditioned CG; returns
/// (horizontal u, vertical v = d_A lambda).
pub fn horizontal_vertical_split(
    a: &LieField,
    w: &LieField,
    params: &SolverParams,
) -> Result<(LieField, LieField)> {
    let grid = a.grid();
    w.grid().same_as(&grid)?;
    let npts = grid.points();
    let dim = 3 * npts;
    let rhs_field = covariant_d_star(a, w)?;
    let vol = grid.cell_volume();
    let pack0 = |f: &LieField, out: &mut [f64]| {
        for l in 0..3 {
            out[l * npts..(l + 1) * npts].copy_from_slice(f.comp(0, l).as_slice().unwrap());
        }
    };
    let unpack0 = |x: &[f64], f: &mut LieField| {
        for l in 0..3 {
            f.comp_mut(0, l)
                .as_slice_mut()
                .unwrap()
                .copy_from_slice(&x[l * npts..(l + 1) * npts]);
        }
    };
    let mut rhs = vec![0.0; dim];
    pack0(&rhs_field.scaled(vol), &mut rhs);
    let mut lam = LieField::zeros(grid, 0)?;
    let mut apply = |x: &[f64], out: &mut [f64]| {
        unpack0(x, &mut lam);
        let op = covariant_d_star(a, &covariant_d(a, &lam).unwrap()).unwrap();
        pack0(&op.scaled(vol), out);
    };
    // spectral inverse Laplacian (floored at the smallest nonzero |k|^2)
    let n = grid.n();
    let floor = 0.1 * grid.k_min() * grid.k_min();
    let mut pre = |r: &[f64], out: &mut [f64]| {
        for l in 0..3 {
            let src = &r[l * npts..(l + 1) * npts];
            let mut arr = Array3::from_shape_fn((n, n, n), |(x, y, z)| {
                Complex64::new(src[(x * n + y) * n + z], 0.0)
            });
            fft3(&mut arr, false);
            for i in 0..n {
                for j in 0..n {
                    for q in 0..n {
                        let kn = grid.wavenumber((i, j, q));
                        arr[(i, j, q)] /= (kn * kn).max(floor) * vol;
                    }
                }
            }
            fft3(&mut arr, true);
            let dst = &mut out[l * npts..(l + 1) * npts];
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        dst[(x * n + y) * n + z] = arr[(x, y, z)].re;
                    }
                }
            }
        }
    };
    let (x, _iters, _res) = lbfgs::pcg(&mut apply, &mut pre, &rhs, params.cg_tol, params.cg_max_iter)
        .map_err(|msg| Error::LinearSolve(format!("vertical projection CG: {msg}")))?;
    let mut lam_sol = LieField::zeros(grid, 0)?;
    unpack0(&x, &mut lam_sol);
    let v = covariant_d(a, &lam_sol)?;
    let u = w.minus(&v);
    Ok((u, v))
}

// ---------- Riemannian metric ----------

pub struct RiemannianNorm {
    pub total_sq: f64,
    pub horizontal_sq: f64,
    pub vertical_sq: f64,
}

/// ||w||_A^2 = E_A ||u||^2 + ||(-Delta_A)^{1/4} v||^2 with (u, v) the
/// horizontal/vertical split of w. The horizontal (Dirichlet-energy) term is
/// the quadrature of ||u'||^2 + ||d_a u||^2 over the variational extension of
/// u; the vertical term uses a dense eigendecomposition of the covariant
/// Laplacian on Lie-scalar functions, applied per spatial component.
pub fn riemannian_norm(
    a: &LieField,
    w: &LieField,
    sol: &YmSolution,
    params: &SolverParams,
) -> Result<RiemannianNorm> {
    let grid = a.grid();
    if grid.n() > params.eigensolve_cap {
        return Err(Error::InvalidArgument(format!(
            "grid n = {} above the dense-eigensolve cap {}",
            grid.n(),
            params.eigensolve_cap
        )));
    }
    let (u, v) = horizontal_vertical_split(a, w, params)?;
    // horizontal term
    let uext = variational_solve(sol, &u, params)?;
    let mut horizontal_sq = 0.0;
    {
        let stack = &sol.stack;
        for (ei, el) in stack.rule().elems.iter().enumerate() {
            for (gi, g) in el.gauss.iter().enumerate() {
                let (a_g, _) = stack.at_gauss(ei, gi);
                let mut ug = LieField::zeros(grid, 1)?;
                let mut dug = LieField::zeros(grid, 1)?;
                for (li, &ni) in el.nodes.iter().enumerate() {
                    ug.add_scaled(&uext.stack.layers()[ni], g.phi[li]);
                    dug.add_scaled(&uext.stack.layers()[ni], g.dphi[li]);
                }
                let dau = covariant_d(&a_g, &ug)?;
                horizontal_sq += g.w * (lie::l2_inner(&dug, &dug)? + lie::l2_inner(&dau, &dau)?);
            }
        }
    }
    // vertical term: dense -Delta_A = d_A* d_A on Lie scalars
    let npts = grid.points();
    let dim = 3 * npts;
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    let mut basis = LieField::zeros(grid, 0)?;
    for col in 0..dim {
        let (l, p) = (col / npts, col % npts);
        basis.comp_mut(0, l).as_slice_mut().unwrap()[p] = 1.0;
        let img = covariant_d_star(a, &covariant_d(a, &basis)?)?;
        for l2 in 0..3 {
            let s = img.comp(0, l2).as_slice().unwrap();
            for p2 in 0..npts {
                mat[(l2 * npts + p2, col)] = s[p2];
            }
        }
        basis.comp_mut(0, l).as_slice_mut().unwrap()[p] = 0.0;
    }
    let sym = 0.5 * (&mat + mat.transpose());
    let eig = sym.symmetric_eigen();
    let vol = grid.cell_volume();
    let mut vertical_sq = 0.0;
    for c in 0..3 {
        let mut vc = nalgebra::DVector::<f64>::zeros(dim);
        for l in 0..3 {
            let s = v.comp(c, l).as_slice().unwrap();
            for p in 0..npts {
                vc[l * npts + p] = s[p];
            }
        }
        for (i, lam) in eig.eigenvalues.iter().enumerate() {
            let lam = lam.max(0.0);
            let proj = eig.eigenvectors.column(i).dot(&vc);
            vertical_sq += lam.sqrt() * proj * proj;
        }
    }
    vertical_sq *= vol;
    Ok(RiemannianNorm {
        total_sq: horizontal_sq + vertical_sq,
        horizontal_sq,
        vertical_sq,
    })
}

// ---------- curl_A quadratic form ----------

/// <u_tan, *d_A u_tan> after projecting u onto the numerically-estimated
/// tangent space of the (anti-)self-dual stratum at A: the normal direction
/// is the restriction of grad ||h_sign|| to the span of u and a few random
/// probes (finite differences with re-solves); this is an approximation of
/// the abstract tangency condition and is reported as such.
pub fn curl_a_quadratic_form<R: Rng>(
    a: &LieField,
    u: &LieField,
    sign: i32,
    params: &SolverParams,
    cert_tol: f64,
    rng: &mut R,
) -> Result<f64> {
    let grid = a.grid();
    let (h, _sol) = h_field(a, sign, params).map_err(Error::from)?;
    let scale = lie::l2_norm(a).max(1e-300) * grid.k_min();
    if lie::l2_norm(&h) > cert_tol * scale {
        return Err(Error::InvalidArgument(format!(
            "A not certified (anti-)self-dual: ||h|| = {:.3e} vs {:.3e}",
            lie::l2_norm(&h),
            cert_tol * scale
        )));
    }
    // orthonormal probe span {u, p1, p2, p3}
    let mut span: Vec<LieField> = vec![u.clone()];
    for _ in 0..3 {
        span.push(lie::random_lie_field(grid, 1, 2, rng));
    }
    let mut basis: Vec<LieField> = Vec::new();
    for mut q in span {
        for b in &basis {
            let c = lie::l2_inner(&q, b)?;
            q.add_scaled(b, -c);
        }
        let nq = lie::l2_norm(&q);
        if nq > 1e-12 {
            basis.push(q.scaled(1.0 / nq));
        }
    }
    // directional derivatives of f(X) = ||h_sign(X)|| along the basis
    let eps = 1e-3 * lie::l2_norm(a).max(1e-3);
    let mut grad_span = LieField::zeros(grid, 1)?;
    for q in &basis {
        let mut ap = a.clone();
        ap.add_scaled(q, eps);
        let mut am = a.clone();
        am.add_scaled(q, -eps);
        let (hp, _) = h_field(&ap, sign, params).map_err(Error::from)?;
        let (hm, _) = h_field(&am, sign, params).map_err(Error::from)?;
        let d = (lie::l2_norm(&hp) - lie::l2_norm(&hm)) / (2.0 * eps);
        grad_span.add_scaled(q, d);
    }
    let gn2 = lie::l2_inner(&grad_span, &grad_span)?;
    let mut u_tan = u.clone();
    if gn2 > 1e-24 {
        // u lies in the span, so <u, grad f> = <u, grad_span>
        let c = lie::l2_inner(u, &grad_span)? / gn2;
        u_tan.add_scaled(&grad_span, -c);
    }
    let curl_au = reinterpret(&covariant_d(a, &u_tan)?, 1);
    lie::l2_inner(&u_tan, &curl_au)
}
