use crate::discretize::Grid;
use crate::nodal::{NodalDecomposition, DEFAULT_ZERO_TOL};
use crate::vf_algebra::SRStructure;

use super::graph::StencilGraph;
use super::metric::ControlMetric;
use super::SrError;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOptions {
    /// Nodes closer than this (sR distance) to a Dirichlet wall are left out
    /// of the maximum.
    pub margin: f64,
    pub eta: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { margin: 0.2, eta: super::DEFAULT_ETA }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct NodalDensity {
    /// Largest distance from a retained node to the nodal set.
    pub rho: f64,
    /// Node attaining `rho`.
    pub argmax: Option<usize>,
    pub considered: usize,
    pub excluded: usize,
}

/// Seeds of the nodal set: nodal nodes at distance 0, and both endpoints of
/// every sign-change edge at the cost of the half edge from its midpoint.
/// Half edges that are not horizontal are dropped.
pub fn nodal_seeds(s: &SRStructure, g: &Grid, dec: &NodalDecomposition, eta: f64) -> Vec<(usize, f64)> {
    let metric = ControlMetric::new(s);
    let mut seeds: Vec<(usize, f64)> = dec.nodal_nodes.iter().map(|&u| (g.unknown_to_node(u), 0.0)).collect();
    let n = g.dim();
    let mut v = vec![0.0; n];
    for e in &dec.sign_change_edges {
        let h = g.axis(e.axis).h;
        let base = g.unknown_coords(e.a);
        for (u, dir) in [(e.a, -1.0), (e.b, 1.0)] {
            // quarter point of the half edge from the midpoint to the endpoint
            let mut q = base.clone();
            q[e.axis] += 0.5 * h + dir * 0.25 * h;
            v.iter_mut().for_each(|x| *x = 0.0);
            v[e.axis] = dir * 0.5 * h;
            let c = metric.cost(&q, &v, eta);
            if c.is_finite() {
                seeds.push((g.unknown_to_node(u), c.sqrt()));
            }
        }
    }
    seeds
}

/// `ρ = max_p d(p, Z)` over grid nodes at least `margin` away from the
/// Dirichlet walls, `Z` being the nodal cells of `dec`.
///
/// An everywhere-nodal vector gives `ρ = 0`.
pub fn nodal_density_statistic(
    s: &SRStructure,
    graph: &StencilGraph,
    dec: &NodalDecomposition,
    opts: &DensityOptions,
) -> Result<NodalDensity, SrError> {
    let g = graph.grid();
    if dec.labels.len() != g.n_unknowns() {
        return Err(SrError::DimensionMismatch { expected: g.n_unknowns(), got: dec.labels.len() });
    }
    if dec.is_all_nodal() {
        return Ok(NodalDensity { rho: 0.0, argmax: None, considered: g.n_unknowns(), excluded: 0 });
    }
    if !dec.has_nodal_cells() {
        return Err(SrError::EmptyNodalSet);
    }
    let seeds = nodal_seeds(s, g, dec, opts.eta);
    if seeds.is_empty() {
        return Err(SrError::EmptyNodalSet);
    }
    let d = graph.distances(&seeds, f64::INFINITY);
    let walls: Vec<(usize, f64)> = (0..g.n_nodes()).filter(|&p| g.is_wall_node(p)).map(|p| (p, 0.0)).collect();
    let dw = graph.distances(&walls, opts.margin);
    let mut rho = 0.0;
    let mut argmax = None;
    let (mut considered, mut excluded) = (0, 0);
    for p in 0..g.n_nodes() {
        if dw[p] < opts.margin {
            excluded += 1;
            continue;
        }
        considered += 1;
        if d[p].is_infinite() {
            return Err(SrError::Unreachable { count: d.iter().enumerate().filter(|(q, x)| x.is_infinite() && dw[*q] >= opts.margin).count() });
        }
        if d[p] > rho || argmax.is_none() {
            rho = d[p];
            argmax = Some(p);
        }
    }
    Ok(NodalDensity { rho, argmax, considered, excluded })
}

/// Horizontal total variation of `σ = sign(v)/2`, a proxy for the sR
/// perimeter measure of the nodal set of `v`.
///
/// `½ Σ_s Σ_p ‖(X_i^s σ)_i‖(p) ρ(p) |cell|`, with one-sided differences
/// whose coefficients are taken at the half step; differences to wall
/// nodes are skipped, so walls contribute nothing.
pub fn horizontal_perimeter_proxy(s: &SRStructure, g: &Grid, v: &[f64]) -> Result<f64, SrError> {
    let n = g.dim();
    if s.dim() != n {
        return Err(SrError::DimensionMismatch { expected: n, got: s.dim() });
    }
    if v.len() != g.n_unknowns() {
        return Err(SrError::DimensionMismatch { expected: g.n_unknowns(), got: v.len() });
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thr = DEFAULT_ZERO_TOL * vmax;
    let sigma: Vec<f64> = v.iter().map(|&x| if x.abs() <= thr { 0.0 } else { 0.5 * x.signum() }).collect();
    let fields: Vec<_> = s.fields().iter().map(|f| f.compile()).collect();
    let density = s.density().compile();
    let cell: f64 = g.axes().iter().map(|a| a.h).product();
    let total: f64 = (0..g.n_unknowns())
        .map(|u| {
            let p = g.unknown_to_node(u);
            let m = g.node_multi(p);
            let x = g.node_coords(p);
            let mut acc = 0.0;
            for sgn in [1i64, -1] {
                let mut sq = 0.0;
                for comps in &fields {
                    let mut d = 0.0;
                    for (j, a) in comps.iter().enumerate() {
                        if a.is_zero() {
                            continue;
                        }
                        let ax = g.axis(j);
                        let Some(i) = ax.step(m[j], sgn) else { continue };
                        let mut mq = m.clone();
                        mq[j] = i;
                        let Some(uq) = g.multi_to_unknown(&mq) else { continue };
                        let mut xm = x.clone();
                        xm[j] += sgn as f64 * ax.h / 2.0;
                        d += a.eval(&xm) * (sigma[uq] - sigma[u]) * sgn as f64 / ax.h;
                    }
                    sq += d * d;
                }
                acc += sq.sqrt();
            }
            0.5 * acc * density.eval(&x)
        })
        .sum();
    Ok(total * cell)
}
