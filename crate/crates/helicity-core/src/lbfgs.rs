//! Limited-memory quasi-Newton minimization with a strong-Wolfe line search
//! and a user-supplied initial-Hessian (preconditioner) application, plus a
//! preconditioned conjugate-gradient solver for the linear subproblems.

use std::collections::VecDeque;

use serde::Serialize;

#[derive(Clone, Debug)]
pub struct LbfgsParams {
    pub memory: usize,
    pub max_iter: usize,
    /// stop when ||g|| <= grad_tol_rel * ||g_0|| + grad_tol_abs
    pub grad_tol_rel: f64,
    pub grad_tol_abs: f64,
    /// declare convergence after two consecutive accepted steps whose relative
    /// decrease falls below this; past that point the objective differences
    /// are inside the double-precision noise band and the line search can
    /// only thrash
    pub f_tol: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        LbfgsParams {
            memory: 12,
            max_iter: 600,
            grad_tol_rel: 1e-9,
            grad_tol_abs: 1e-14,
            f_tol: 1e-12,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub f: f64,
    pub grad_norm: f64,
}

pub trait Objective {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
    /// Apply an approximation of the inverse Hessian to `g`.
    fn precondition(&mut self, g: &[f64], out: &mut [f64]);
}

pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub history: Vec<IterRecord>,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn minimize(obj: &mut dyn Objective, x0: Vec<f64>, params: &LbfgsParams) -> MinimizeResult {
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g);
    let g0_norm = norm(&g);
    let tol = params.grad_tol_rel * g0_norm + params.grad_tol_abs;
    let mut history = vec![IterRecord {
        iter: 0,
        f,
        grad_norm: g0_norm,
    }];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new(); // (s, y, rho)
    let mut converged = norm(&g) <= tol;
    let mut iter = 0;
    let mut stalls = 0usize;
    while !converged && iter < params.max_iter {
        iter += 1;
        // two-loop recursion with preconditioned center
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y.iter()) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let mut r = vec![0.0; n];
        obj.precondition(&q, &mut r);
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s.iter()) {
                *ri += (a - b) * si;
            }
        }
        // descent direction
        let mut dir: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut dg = dot(&dir, &g);
        if !(dg < 0.0) {
            // fall back to preconditioned steepest descent
            obj.precondition(&g, &mut r);
            dir = r.iter().map(|v| -v).collect();
            dg = dot(&dir, &g);
            if !(dg < 0.0) {
                break;
            }
            mem.clear();
        }
        let f_before = f;
        match wolfe_search(obj, &x, f, &g, &dir, dg, params) {
            Some((alpha, fx, gx, xnew)) => {
                let s: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
                let y: Vec<f64> = gx.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-14 * norm(&s) * norm(&y) {
                    if mem.len() == params.memory {
                        mem.pop_front();
                    }
                    mem.push_back((s, y.clone(), 1.0 / sy));
                }
                x = xnew;
                f = fx;
                g = gx;
            }
            None => break,
        }
        let gn = norm(&g);
        history.push(IterRecord {
            iter,
            f,
            grad_norm: gn,
        });
        // function-decrease criterion (factr-style): once accepted steps stop
        // moving the objective relative to machine precision, further line
        // searches only probe roundoff noise
        let df = f_before - f;
        if df <= params.f_tol * f_before.abs().max(f.abs()).max(1.0) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        converged = gn <= tol || stalls >= 2;
    }
    let grad_norm = norm(&g);
    MinimizeResult {
        x,
        f,
        grad_norm,
        history,
        converged,
    }
}

/// Strong-Wolfe line search (bracket + zoom with bisection/interpolation).
fn wolfe_search(
    obj: &mut dyn Objective,
    x: &[f64],
    f0: f64,
    _g0: &[f64],
    dir: &[f64],
    dg0: f64,
    params: &LbfgsParams,
) -> Option<(f64, f64, Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let mut gbuf = vec![0.0; n];
    let mut eval_at = |alpha: f64, gbuf: &mut Vec<f64>| -> (f64, f64, Vec<f64>) {
        let xa: Vec<f64> = x.iter().zip(dir.iter()).map(|(xi, di)| xi + alpha * di).collect();
        let fa = obj.eval(&xa, gbuf);
        let dga = dot(gbuf, dir);
        (fa, dga, xa)
    };
    let c1 = params.c1;
    let c2 = params.c2;
    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut alpha = 1.0;
    let mut bracket: Option<(f64, f64, f64, f64)> = None; // lo, f_lo, hi, f_hi
    for i in 0..30 {
        let (fa, dga, xa) = eval_at(alpha, &mut gbuf);
        if fa > f0 + c1 * alpha * dg0 || (i > 0 && fa >= f_prev) {
            bracket = Some((alpha_prev, f_prev, alpha, fa));
            break;
        }
        if dga.abs() <= -c2 * dg0 {
            return Some((alpha, fa, gbuf, xa));
        }
        if dga >= 0.0 {
            bracket = Some((alpha, fa, alpha_prev, f_prev));
            break;
        }
        alpha_prev = alpha;
        f_prev = fa;
        alpha *= 2.5;
    }
    let (mut lo, mut f_lo, mut hi, mut f_hi) = bracket?;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        let (fm, dgm, xm) = eval_at(mid, &mut gbuf);
        if fm > f0 + c1 * mid * dg0 || fm >= f_lo {
            hi = mid;
            f_hi = fm;
        } else {
            if dgm.abs() <= -c2 * dg0 {
                return Some((mid, fm, gbuf, xm));
            }
            if dgm * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = mid;
            f_lo = fm;
        }
        if (hi - lo).abs() < 1e-14 * lo.abs().max(1.0) {
            let (fm, _, xm) = eval_at(lo, &mut gbuf);
            return Some((lo, fm, gbuf, xm));
        }
    }
    let _ = f_hi;
    None
}

/// Preconditioned conjugate gradients for symmetric positive-definite
/// operators given as closures.
pub fn pcg(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    precond: &mut dyn FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    tol_rel: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64), String> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let rhs_norm = norm(rhs).max(1e-300);
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rn = norm(&r);
        if rn <= tol_rel * rhs_norm {
            return Ok((x, it, rn / rhs_norm));
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(format!(
                "indefinite or singular operator at iteration {it}: p.Ap = {pap:.3e}"
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = norm(&r) / rhs_norm;
    if rn <= tol_rel * 10.0 {
        Ok((x, max_iter, rn))
    } else {
        Err(format!("CG stagnation: relative residual {rn:.3e}"))
    }
}
