//! Stacks of Lie 1-forms over the discretized half-space axis: the carrier of
//! Yang-Mills-Poisson extensions, their discrete action, and the layer-wise
//! duality / Euler-equation diagnostics.

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::TorusGrid;
use crate::lie::{
    self, covariant_d_star, curvature3, gauge_transform, GaugeFunction, LieField,
};
use crate::sgrid::{p2_rule, QuadRule, SGrid};

#[derive(Clone, Debug)]
pub struct HalfSpaceField {
    s: SGrid,
    rule: QuadRule,
    layers: Vec<LieField>,
    /// a'(s_j) when available (closed forms or post-solve reconstruction);
    /// diagnostics fall back to finite differences in s without it.
    dlayers: Option<Vec<LieField>>,
}

impl HalfSpaceField {
    pub fn new(s: SGrid, layers: Vec<LieField>) -> Result<Self> {
        if layers.len() != s.len() {
            return Err(Error::InvalidArgument(format!(
                "{} layers vs {} s-nodes",
                layers.len(),
                s.len()
            )));
        }
        let grid = layers[0].grid();
        for l in &layers {
            l.grid().same_as(&grid)?;
            if l.degree() != 1 {
                return Err(Error::Degree("stack layers must be 1-forms".into()));
            }
        }
        let rule = p2_rule(&s);
        Ok(HalfSpaceField {
            s,
            rule,
            layers,
            dlayers: None,
        })
    }

    pub fn with_derivatives(mut self, dlayers: Vec<LieField>) -> Result<Self> {
        if dlayers.len() != self.layers.len() {
            return Err(Error::InvalidArgument("derivative layer count".into()));
        }
        self.dlayers = Some(dlayers);
        Ok(self)
    }

    /// u(1)-embedded closed-form extension a(s) = e^{-s|C|} A with exact
    /// layer derivatives.
    pub fn abelian_embedded(a: &VectorField, lie_dir: usize, s: SGrid) -> Result<Self> {
        let mut layers = Vec::with_capacity(s.len());
        let mut dlayers = Vec::with_capacity(s.len());
        for &sj in s.points() {
            let aj = crate::abelian::poisson_extend_abelian(a, sj)?;
            // a'(s) = -|C| a(s) on the transverse part
            let spec = crate::field::spectral_transform(&aj).transverse_project();
            let daj = crate::field::inverse_transform(&spec.wavenumber_power(1.0)).scaled(-1.0);
            layers.push(LieField::from_abelian(&aj, lie_dir));
            dlayers.push(LieField::from_abelian(&daj, lie_dir));
        }
        HalfSpaceField::new(s, layers)?.with_derivatives(dlayers)
    }

    /// Constant-in-s pure-gauge stack a(s) = g^{-1} dg.
    pub fn pure_gauge(g: &GaugeFunction, s: SGrid) -> Result<Self> {
        let mc = g.maurer_cartan();
        let m = s.len();
        let grid = g.grid();
        let layers = vec![mc; m];
        let dlayers = vec![LieField::zeros(grid, 1)?; m];
        HalfSpaceField::new(s, layers)?.with_derivatives(dlayers)
    }

    pub fn grid(&self) -> TorusGrid {
        self.layers[0].grid()
    }

    pub fn s_grid(&self) -> &SGrid {
        &self.s
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn layers(&self) -> &[LieField] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut Vec<LieField> {
        self.dlayers = None;
        &mut self.layers
    }

    pub fn layer(&self, j: usize) -> &LieField {
        &self.layers[j]
    }

    pub fn boundary(&self) -> &LieField {
        &self.layers[0]
    }

    pub fn derivative_layers(&self) -> Option<&[LieField]> {
        self.dlayers.as_deref()
    }

    /// a'(s_j): stored derivative if available, otherwise second-order finite
    /// differences on the nonuniform grid.
    pub fn slope(&self, j: usize) -> LieField {
        if let Some(d) = &self.dlayers {
            return d[j].clone();
        }
        let pts = self.s.points();
        let m = pts.len();
        let fd3 = |j0: usize, j1: usize, j2: usize, at: f64| -> LieField {
            // derivative at `at` of the quadratic through three nodes
            let (x0, x1, x2) = (pts[j0], pts[j1], pts[j2]);
            let d0 = (2.0 * at - x1 - x2) / ((x0 - x1) * (x0 - x2));
            let d1 = (2.0 * at - x0 - x2) / ((x1 - x0) * (x1 - x2));
            let d2 = (2.0 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
            let mut out = self.layers[j0].scaled(d0);
            out.add_scaled(&self.layers[j1], d1);
            out.add_scaled(&self.layers[j2], d2);
            out
        };
        if j == 0 {
            fd3(0, 1, 2, pts[0])
        } else if j == m - 1 {
            fd3(m - 3, m - 2, m - 1, pts[m - 1])
        } else {
            fd3(j - 1, j, j + 1, pts[j])
        }
    }

    /// Interpolated field and its s-derivative at one Gauss point.
    pub fn at_gauss(&self, elem: usize, gp: usize) -> (LieField, LieField) {
        let el = &self.rule.elems[elem];
        let g = &el.gauss[gp];
        let mut a = LieField::zeros(self.grid(), 1).unwrap();
        let mut da = LieField::zeros(self.grid(), 1).unwrap();
        for (li, &ni) in el.nodes.iter().enumerate() {
            a.add_scaled(&self.layers[ni], g.phi[li]);
            da.add_scaled(&self.layers[ni], g.dphi[li]);
        }
        (a, da)
    }

    /// Same-gauge transform of every layer (s-independent g); layer
    /// derivatives transform by conjugation alone.
    pub fn gauge_transformed(&self, g: &GaugeFunction) -> Result<HalfSpaceField> {
        let layers = self
            .layers
            .iter()
            .map(|l| gauge_transform(l, g))
            .collect::<Result<Vec<_>>>()?;
        let out = HalfSpaceField::new(self.s.clone(), layers)?;
        match &self.dlayers {
            None => Ok(out),
            Some(d) => out.with_derivatives(d.iter().map(|l| g.conjugate(l)).collect()),
        }
    }
}

/// Discrete Poisson action: Gauss quadrature of ||a'(s)||^2 + ||b(s)||^2 over
/// the piecewise-quadratic interpolant of the layers.
pub fn ym_poisson_action(stack: &HalfSpaceField) -> Result<f64> {
    if stack.layers().len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 layers".into()));
    }
    let mut total = 0.0;
    for (ei, el) in stack.rule().elems.iter().enumerate() {
        for gi in 0..el.gauss.len() {
            let w = el.gauss[gi].w;
            let (a, da) = stack.at_gauss(ei, gi);
            let b = curvature3(&a)?;
            total += w * (lie::l2_inner(&da, &da)? + lie::l2_inner(&b, &b)?);
        }
    }
    Ok(total)
}

/// Max over interior layers of ||a''(s_j) - d*_{a_j} b_j|| / scale, with a''
/// by centered second differences on the nonuniform grid.
pub fn ym_poisson_residual(stack: &HalfSpaceField) -> Result<f64> {
    let m = stack.layers().len();
    if m < 3 {
        return Err(Error::InvalidArgument("need at least 3 layers".into()));
    }
    let pts = stack.s_grid().points();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 1..m - 1 {
        let h0 = pts[j] - pts[j - 1];
        let h1 = pts[j + 1] - pts[j];
        // second derivative of the quadratic through the three nodes
        let c0 = 2.0 / (h0 * (h0 + h1));
        let c1 = -2.0 / (h0 * h1);
        let c2 = 2.0 / (h1 * (h0 + h1));
        let mut a2 = stack.layer(j - 1).scaled(c0);
        a2.add_scaled(stack.layer(j), c1);
        a2.add_scaled(stack.layer(j + 1), c2);
        let aj = stack.layer(j);
        let rhs = covariant_d_star(aj, &curvature3(aj)?)?;
        let res = lie::l2_norm(&a2.minus(&rhs));
        worst = worst.max(res);
        scale = scale.max(lie::l2_norm(&a2)).max(lie::l2_norm(&rhs));
    }
    Ok(worst / scale.max(1e-300))
}

pub struct DualityDiagnostics {
    pub residual: f64,
    pub scale: f64,
    /// layer-wise | ||a'||^2 - ||b||^2 |, the energy-balance defect
    pub balance: Vec<f64>,
    pub balance_scale: f64,
}

/// Max over layers of ||a'(s_j) - sign * (*b(s_j))|| / scale, together with
/// the layer-wise energy balance ||a'||^2 = ||b||^2.
pub fn duality_residual_ym(stack: &HalfSpaceField, sign: i32) -> Result<DualityDiagnostics> {
    let m = stack.layers().len();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least 2 layers".into()));
    }
    let sgn = sign.signum() as f64;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut balance = Vec::with_capacity(m);
    let mut balance_scale = 0.0f64;
    for j in 0..m {
        let aj = stack.layer(j);
        let slope = stack.slope(j);
        // Hodge dual of the (dual-stored) curvature is the stored vector itself
        let b = curvature3(aj)?;
        let star_b = reinterpret(&b, 1);
        let res = lie::l2_norm(&slope.minus(&star_b.scaled(sgn)));
        let np = lie::l2_norm(&slope);
        let nb = lie::l2_norm(&star_b);
        worst = worst.max(res);
        scale = scale.max(np + nb);
        balance.push((np * np - nb * nb).abs());
        balance_scale = balance_scale.max(np * np + nb * nb);
    }
    Ok(DualityDiagnostics {
        residual: worst / scale.max(1e-300),
        scale,
        balance,
        balance_scale,
    })
}

/// Reinterpret the storage of a 3-component field under the Hodge isometry
/// (degree 1 <-> 2); panics on component-count mismatch.
pub fn reinterpret(f: &LieField, degree: usize) -> LieField {
    let mut out = LieField::zeros(f.grid(), degree).unwrap();
    assert_eq!(out.ncomp(), f.ncomp(), "incompatible reinterpretation");
    for c in 0..f.ncomp() {
        for a in 0..3 {
            *out.comp_mut(c, a) = f.comp(c, a).clone();
        }
    }
    out
}

/// Max over layers of ||d*_{a_j} a'(s_j)||, the horizontality defect.
pub fn horizontality_defect(stack: &HalfSpaceField) -> Result<Vec<f64>> {
    (0..stack.layers().len())
        .map(|j| {
            let aj = stack.layer(j);
            let slope = stack.slope(j);
            Ok(lie::l2_norm(&covariant_d_star(aj, &slope)?))
        })
        .collect()
}
