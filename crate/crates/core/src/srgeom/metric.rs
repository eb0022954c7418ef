use nalgebra::{DMatrix, DVector};

use crate::vf_algebra::{CompiledPoly, SRStructure};

/// Default off-distribution tolerance: `v` is horizontal when its residual
/// against `span{X_i(q)}` is at most `η ‖v‖`.
pub const DEFAULT_ETA: f64 = 1e-8;

/// Fields compiled for repeated evaluation of the control metric.
#[derive(Clone, Debug)]
pub struct ControlMetric {
    fields: Vec<Vec<CompiledPoly>>,
    dim: usize,
}

impl ControlMetric {
    pub fn new(s: &SRStructure) -> Self {
        ControlMetric { fields: s.fields().iter().map(|f| f.compile()).collect(), dim: s.dim() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N × m` matrix with columns `X_i(q)`.
    pub fn frame(&self, q: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.fields.len(), |j, i| self.fields[i][j].eval(q))
    }

    /// Whether every coefficient is independent of coordinate `j`.
    pub fn independent_of(&self, j: usize) -> bool {
        self.fields.iter().all(|f| f.iter().all(|c| c.independent_of(j)))
    }

    /// `Σ u_i²` for the minimal-norm `u` with `v = Σ u_i X_i(q)`, or `∞` when
    /// `v` is not horizontal at tolerance `eta`.
    pub fn cost(&self, q: &[f64], v: &[f64], eta: f64) -> f64 {
        let f = self.frame(q);
        match min_norm_solve(&f, v, eta) {
            Some(u) => u.norm_squared(),
            None => f64::INFINITY,
        }
    }
}

/// Minimal-norm least-squares `u` of `F u = v`; `None` if the residual
/// exceeds `eta ‖v‖`.
pub(crate) fn min_norm_solve(f: &DMatrix<f64>, v: &[f64], eta: f64) -> Option<DVector<f64>> {
    let v = DVector::from_column_slice(v);
    let vn = v.norm();
    if vn == 0.0 {
        return Some(DVector::zeros(f.ncols()));
    }
    let svd = f.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let u = if smax == 0.0 {
        DVector::zeros(f.ncols())
    } else {
        svd.solve(&v, 1e-12 * smax).ok()?
    };
    let r = (&v - f * &u).norm();
    (r <= eta * vn).then_some(u)
}

/// `g_q(v)` with the default tolerance.
pub fn control_metric_cost(s: &SRStructure, q: &[f64], v: &[f64]) -> f64 {
    control_metric_cost_with(s, q, v, DEFAULT_ETA)
}

pub fn control_metric_cost_with(s: &SRStructure, q: &[f64], v: &[f64], eta: f64) -> f64 {
    ControlMetric::new(s).cost(q, v, eta)
}
