use rayon::prelude::*;

use crate::discretize::{Axis, Grid};
use crate::vf_algebra::SRStructure;

use super::graph::{StencilGraph, StencilSpec};
use super::SrError;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BallBoxRow {
    pub eps: f64,
    /// Largest `a` with `Box_q(aε) ⊆ B_ε(q)`.
    pub inner: f64,
    /// Smallest `b` with `B_ε(q) ⊆ Box_q(bε)`.
    pub outer: f64,
    pub ratio: f64,
    pub nodes_in_ball: usize,
    /// The ball reaches the edge of its window.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BallBoxReport {
    pub q: Vec<f64>,
    pub weights: Vec<u32>,
    pub rows: Vec<BallBoxRow>,
}

impl BallBoxReport {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn any_truncated(&self) -> bool {
        self.rows.iter().any(|r| r.truncated)
    }
}

/// Anisotropic gauge `max_i |x_i − q_i|^{1/w_i} / ε`; the box `Box_q(tε)` is
/// its sublevel set `{gauge ≤ t}`.
pub fn box_gauge(x: &[f64], q: &[f64], weights: &[u32], eps: f64) -> f64 {
    x.iter()
        .zip(q)
        .zip(weights)
        .map(|((a, b), &w)| (a - b).abs().powf(1.0 / w as f64))
        .fold(0.0, f64::max)
        / eps
}

/// Per-ε sampling window around `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallBoxOptions {
    /// Nodes per axis.
    pub nodes: usize,
    /// Half-width of the window along axis `i` is `window[i] · ε^{w_i}`.
    pub window: Vec<f64>,
    pub spec: StencilSpec,
    pub eta: f64,
}

/// Window grid whose node `nodes/2` (per axis) sits exactly at `q`.
pub fn window_grid(q: &[f64], half: &[f64], nodes: usize) -> Result<Grid, crate::discretize::DiscretizeError> {
    let c = nodes / 2;
    let axes = q
        .iter()
        .zip(half)
        .map(|(&qi, &hw)| {
            let h = 2.0 * hw / (nodes - 1) as f64;
            Axis::dirichlet(qi - c as f64 * h, qi + (nodes - 1 - c) as f64 * h, nodes)
        })
        .collect();
    Grid::new(format!("window-{nodes}"), axes)
}

/// Sandwich constants of `B_ε(q)` between boxes, one window grid per ε.
pub fn ball_box_check(
    s: &SRStructure,
    q: &[f64],
    eps_list: &[f64],
    weights: &[u32],
    opts: &BallBoxOptions,
) -> Result<BallBoxReport, SrError> {
    let n = s.dim();
    if q.len() != n || weights.len() != n || opts.window.len() != n {
        return Err(SrError::DimensionMismatch { expected: n, got: q.len().min(weights.len()).min(opts.window.len()) });
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(SrError::InvalidEps(eps_list.to_vec()));
    }
    let rows: Result<Vec<BallBoxRow>, SrError> = eps_list
        .par_iter()
        .map(|&eps| {
            let half: Vec<f64> = opts.window.iter().zip(weights).map(|(c, &w)| c * eps.powi(w as i32)).collect();
            let g = window_grid(q, &half, opts.nodes).map_err(|e| SrError::InvalidStencil(e.to_string()))?;
            let graph = StencilGraph::new(s, &g, opts.spec.clone(), opts.eta)?;
            let centre = g.node_index(&vec![opts.nodes / 2; n]);
            let d = graph.distances(&[(centre, 0.0)], eps);
            let mut inner = f64::INFINITY;
            let mut outer: f64 = 0.0;
            let mut count = 0;
            let mut truncated = false;
            for (p, &dp) in d.iter().enumerate() {
                let x = g.node_coords(p);
                let gauge = box_gauge(&x, q, weights, eps);
                if dp <= eps {
                    count += 1;
                    outer = outer.max(gauge);
                    truncated |= g.is_wall_node(p);
                } else {
                    inner = inner.min(gauge);
                }
            }
            Ok(BallBoxRow { eps, inner, outer, ratio: outer / inner, nodes_in_ball: count, truncated })
        })
        .collect();
    Ok(BallBoxReport { q: q.to_vec(), weights: weights.to_vec(), rows: rows? })
}
