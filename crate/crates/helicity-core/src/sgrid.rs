//! Discretization of the Euclidean-time axis s in [0, S]: geometric node
//! placement, piecewise-quadratic (P2) elements with Gauss quadrature, the
//! matching 1-d mass/stiffness matrices, and cubic-spline quadrature weights
//! used to reconstruct a'(s) from a''(s) along converged solutions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SGrid {
    points: Vec<f64>,
}

impl SGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidArgument("need at least 3 s-nodes".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidArgument("s-grid must start at 0".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("s-grid must be increasing".into()));
        }
        Ok(SGrid { points })
    }

    /// Geometric grid: interval widths h_j = h0 * r^j chosen so that the
    /// `m - 1` intervals exactly fill [0, s_max].
    pub fn geometric(m: usize, s_max: f64, h0: f64) -> Result<Self> {
        if m < 3 || s_max <= 0.0 || h0 <= 0.0 || h0 * (m as f64 - 1.0) > s_max {
            return Err(Error::InvalidArgument(format!(
                "bad geometric grid: m = {m}, S = {s_max}, h0 = {h0}"
            )));
        }
        let nint = (m - 1) as i32;
        let total = |r: f64| -> f64 {
            if (r - 1.0).abs() < 1e-14 {
                h0 * nint as f64
            } else {
                h0 * (r.powi(nint) - 1.0) / (r - 1.0)
            }
        };
        let (mut lo, mut hi) = (1.0, 2.0);
        while total(hi) < s_max {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) < s_max {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let mut points = Vec::with_capacity(m);
        let mut s = 0.0;
        let mut h = h0;
        points.push(0.0);
        for _ in 0..nint {
            s += h;
            h *= r;
            points.push(s);
        }
        // land exactly on s_max
        let last = points.len() - 1;
        let scale = s_max / points[last];
        for p in points.iter_mut() {
            *p *= scale;
        }
        points[0] = 0.0;
        SGrid::from_points(points)
    }

    pub fn uniform(m: usize, s_max: f64) -> Result<Self> {
        let h = s_max / (m as f64 - 1.0);
        SGrid::from_points((0..m).map(|j| j as f64 * h).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn s_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Grid with every interval halved (for refinement studies).
    pub fn refined(&self) -> SGrid {
        let mut pts = Vec::with_capacity(2 * self.points.len() - 1);
        for w in self.points.windows(2) {
            pts.push(w[0]);
            pts.push(0.5 * (w[0] + w[1]));
        }
        pts.push(self.s_max());
        SGrid { points: pts }
    }
}

#[derive(Clone, Debug)]
pub struct GaussPoint {
    pub s: f64,
    pub w: f64,
    /// shape values at this point, one per element node
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Element {
    pub nodes: Vec<usize>,
    pub gauss: Vec<GaussPoint>,
}

#[derive(Clone, Debug)]
pub struct QuadRule {
    pub elems: Vec<Element>,
}

fn lagrange(nodes: &[f64], i: usize, s: f64) -> f64 {
    let mut v = 1.0;
    for (j, &xj) in nodes.iter().enumerate() {
        if j != i {
            v *= (s - xj) / (nodes[i] - xj);
        }
    }
    v
}

fn lagrange_deriv(nodes: &[f64], i: usize, s: f64) -> f64 {
    let mut sum = 0.0;
    for (k, &xk) in nodes.iter().enumerate() {
        if k == i {
            continue;
        }
        let mut term = 1.0 / (nodes[i] - xk);
        for (j, &xj) in nodes.iter().enumerate() {
            if j != i && j != k {
                term *= (s - xj) / (nodes[i] - xj);
            }
        }
        sum += term;
    }
    sum
}

fn element(node_ids: &[usize], xs: &[f64], gauss_n: usize) -> Element {
    let (a, b) = (xs[0], *xs.last().unwrap());
    let (pts, wts): (Vec<f64>, Vec<f64>) = match gauss_n {
        2 => {
            let g = 1.0 / 3f64.sqrt();
            (vec![-g, g], vec![1.0, 1.0])
        }
        _ => {
            let g = (3.0f64 / 5.0).sqrt();
            (vec![-g, 0.0, g], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
    };
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let gauss = pts
        .iter()
        .zip(wts.iter())
        .map(|(&t, &w)| {
            let s = mid + half * t;
            GaussPoint {
                s,
                w: w * half,
                phi: (0..xs.len()).map(|i| lagrange(xs, i, s)).collect(),
                dphi: (0..xs.len()).map(|i| lagrange_deriv(xs, i, s)).collect(),
            }
        })
        .collect();
    Element {
        nodes: node_ids.to_vec(),
        gauss,
    }
}

/// Pair consecutive intervals into quadratic elements (Gauss-3); a trailing
/// odd interval becomes a linear element (Gauss-2).
pub fn p2_rule(s: &SGrid) -> QuadRule {
    let pts = s.points();
    let nint = pts.len() - 1;
    let mut elems = Vec::new();
    let npanels = nint / 2;
    for p in 0..npanels {
        let ids = [2 * p, 2 * p + 1, 2 * p + 2];
        let xs = [pts[ids[0]], pts[ids[1]], pts[ids[2]]];
        elems.push(element(&ids, &xs, 3));
    }
    if nint % 2 == 1 {
        let ids = [nint - 1, nint];
        let xs = [pts[ids[0]], pts[ids[1]]];
        elems.push(element(&ids, &xs, 2));
    }
    QuadRule { elems }
}

/// 1-d stiffness K_ij = sum w dphi_i dphi_j and mass M_ij = sum w phi_i phi_j
/// over all nodes of the grid.
pub fn assemble_matrices(rule: &QuadRule, m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut k = DMatrix::zeros(m, m);
    let mut mass = DMatrix::zeros(m, m);
    for el in &rule.elems {
        for g in &el.gauss {
            for (li, &ni) in el.nodes.iter().enumerate() {
                for (lj, &nj) in el.nodes.iter().enumerate() {
                    k[(ni, nj)] += g.w * g.dphi[li] * g.dphi[lj];
                    mass[(ni, nj)] += g.w * g.phi[li] * g.phi[lj];
                }
            }
        }
    }
    (k, mass)
}

/// Natural cubic spline quadrature: weights W[j][i] with
/// `integral_{s_j}^{S} f(s) ds ~= sum_i W[j][i] f(s_i)`.
pub fn spline_tail_integral_weights(s: &[f64]) -> Vec<Vec<f64>> {
    let m = s.len();
    let mut weights = vec![vec![0.0; m]; m];
    for basis in 0..m {
        let mut f = vec![0.0; m];
        f[basis] = 1.0;
        let sec = natural_spline_second_derivs(s, &f);
        // interval integrals
        let mut iv = vec![0.0; m - 1];
        for j in 0..m - 1 {
            let h = s[j + 1] - s[j];
            iv[j] = 0.5 * h * (f[j] + f[j + 1]) - h * h * h / 24.0 * (sec[j] + sec[j + 1]);
        }
        // tails
        let mut tail = 0.0;
        let mut tails = vec![0.0; m];
        for j in (0..m - 1).rev() {
            tail += iv[j];
            tails[j] = tail;
        }
        for j in 0..m {
            weights[j][basis] = tails[j];
        }
    }
    weights
}

fn natural_spline_second_derivs(s: &[f64], f: &[f64]) -> Vec<f64> {
    let m = s.len();
    let mut sec = vec![0.0; m];
    if m < 3 {
        return sec;
    }
    // tridiagonal system for interior second derivatives
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut sub = vec![0.0; m];
    let mut sup = vec![0.0; m];
    for j in 1..m - 1 {
        let h0 = s[j] - s[j - 1];
        let h1 = s[j + 1] - s[j];
        sub[j] = h0 / 6.0;
        diag[j] = (h0 + h1) / 3.0;
        sup[j] = h1 / 6.0;
        rhs[j] = (f[j + 1] - f[j]) / h1 - (f[j] - f[j - 1]) / h0;
    }
    // Thomas algorithm on indices 1..m-1
    for j in 2..m - 1 {
        let w = sub[j] / diag[j - 1];
        diag[j] -= w * sup[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    for j in (1..m - 1).rev() {
        let upper = if j + 1 <= m - 2 { sup[j] * sec[j + 1] } else { 0.0 };
        sec[j] = (rhs[j] - upper) / diag[j];
    }
    sec
}
