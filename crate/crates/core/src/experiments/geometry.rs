use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discretize::{build_grid, Axis, Grid, Potential};
use crate::nodal::{nodal_decomposition, DEFAULT_ZERO_TOL};
use crate::srgeom::{
    ball_box_check, boxcount_dimension, nodal_density_statistic, BallBoxOptions, BallBoxReport, BoxCount, DensityOptions, SrError,
    StencilGraph, StencilSpec, DEFAULT_ETA,
};
use crate::vf_algebra::{compute_flag, desingularize_grushin, rat_frac, Point, SRStructure};

use super::config::ScenarioConfig;
use super::report::{band, kendall_tau};
use super::spectra::ground_state;
use super::ExperimentError;

pub const DENSITY_BAND: f64 = 4.0;
pub const DENSITY_TAU: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DensityRow {
    pub k: u32,
    pub eigenvalue: f64,
    pub rho: f64,
    pub rho_times_sqrt_lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityResult {
    pub rows: Vec<DensityRow>,
    pub band: f64,
    pub tau: f64,
}

impl DensityResult {
    pub fn pass(&self) -> bool {
        self.band <= DENSITY_BAND && self.tau.abs() <= DENSITY_TAU
    }
}

/// `Ψ_k = ψ_k(x) cos(k y)` on the Grushin strip, `ψ_k` the ground state of
/// `−∂x² + k² x^{2α}` on the grid's own x nodes.
pub fn grushin_mode(g: &Grid, alpha: u32, k: u32, tol: f64) -> Result<(f64, Vec<f64>), ExperimentError> {
    let nx = g.axis(0).count;
    let ground = ground_state(Potential::Power { k: k as f64, alpha }, (g.axis(0).lo, g.axis(0).coord(nx - 1)), nx - 2, tol)?;
    let v = (0..g.n_unknowns())
        .map(|u| {
            let m = g.unknown_multi(u);
            ground.vector[m[0] - 1] * (k as f64 * g.axis(1).coord(m[1])).cos()
        })
        .collect();
    Ok((ground.value, v))
}

/// `ρ(k) √μ_k` for analytic Grushin modes, with its band and drift.
pub fn nodal_density(cfg: &ScenarioConfig) -> Result<DensityResult, ExperimentError> {
    let alpha = cfg.alpha[0];
    let s = SRStructure::grushin(alpha);
    let g = build_grid(s.domain(), &cfg.grid)?;
    let graph = StencilGraph::new(&s, &g, StencilSpec::Generic { radius: cfg.radius.clone() }, DEFAULT_ETA)?;
    let opts = DensityOptions { margin: cfg.margin, eta: DEFAULT_ETA };
    let rows: Vec<DensityRow> = cfg
        .k
        .par_iter()
        .map(|&k| {
            let (mu, v) = grushin_mode(&g, alpha, k, 1e-12)?;
            let dec = nodal_decomposition(&g, &v, DEFAULT_ZERO_TOL)?;
            let rho = nodal_density_statistic(&s, &graph, &dec, &opts)?.rho;
            Ok(DensityRow { k, eigenvalue: mu, rho, rho_times_sqrt_lambda: rho * mu.sqrt() })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let seq: Vec<f64> = rows.iter().map(|r| r.rho_times_sqrt_lambda).collect();
    Ok(DensityResult { band: band(&seq), tau: kendall_tau(&seq), rows })
}

pub const BALL_BOX_MAX_RATIO: f64 = 4.0;

/// Window half-widths `(c_x, c_y)`: the window spans `±c_x ε` by `±c_y ε^{α+1}`.
pub fn ball_box_window(alpha: u32) -> Vec<f64> {
    vec![1.3, if alpha == 1 { 0.35 } else { 0.3 }]
}

/// Ball-box sandwich at the Grushin singular point, weights from the flag.
pub fn ball_box(cfg: &ScenarioConfig) -> Result<Vec<BallBoxReport>, ExperimentError> {
    cfg.alpha
        .iter()
        .map(|&alpha| {
            let s = SRStructure::grushin(alpha);
            let flag = compute_flag(&s, &Point::exact_ints(&[0, 0]), alpha as usize + 2);
            let weights: Vec<u32> = flag.weights.iter().map(|&w| w as u32).collect();
            let opts = BallBoxOptions {
                nodes: cfg.window_nodes,
                window: ball_box_window(alpha),
                spec: StencilSpec::Generic { radius: cfg.radius.clone() },
                eta: DEFAULT_ETA,
            };
            Ok(ball_box_check(&s, &[0.0, 0.0], &cfg.eps, &weights, &opts)?)
        })
        .collect()
}

pub fn ball_box_pass(r: &BallBoxReport) -> bool {
    r.rows.iter().all(|row| row.ratio <= BALL_BOX_MAX_RATIO && row.inner > 0.0 && !row.truncated)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCountResult {
    pub full: BoxCount,
    pub full_complete: bool,
    pub plane: BoxCount,
    pub plane_complete: bool,
}

pub const BOX_COUNT_TOL: f64 = 0.3;

impl BoxCountResult {
    pub fn pass(&self) -> bool {
        self.full_complete
            && self.plane_complete
            && (self.full.slope - 4.0).abs() <= BOX_COUNT_TOL
            && (self.plane.slope - 3.0).abs() <= BOX_COUNT_TOL
    }
}

fn count_or_partial(r: Result<BoxCount, SrError>) -> Result<(BoxCount, bool), ExperimentError> {
    match r {
        Ok(b) => Ok((b, true)),
        Err(SrError::BudgetExceeded(partial)) => Ok((*partial, false)),
        Err(e) => Err(e.into()),
    }
}

/// Greedy covering numbers of the Heisenberg box and of `{y = 0}`.
pub fn box_counting(cfg: &ScenarioConfig) -> Result<BoxCountResult, ExperimentError> {
    let h = SRStructure::heisenberg();
    let g = build_grid(h.domain(), &cfg.grid)?;
    let spec = StencilSpec::Completion { driving: vec![0, 1], radius: cfg.radius.clone() };
    let graph = StencilGraph::new(&h, &g, spec, DEFAULT_ETA)?;
    let all: Vec<usize> = (0..g.n_nodes()).collect();
    let plane: Vec<usize> = all.iter().copied().filter(|&p| g.node_multi(p)[1] == 0).collect();
    let (a, b) = rayon::join(
        || count_or_partial(boxcount_dimension(&graph, &all, &cfg.eps, cfg.budget)),
        || count_or_partial(boxcount_dimension(&graph, &plane, &cfg.eps, cfg.budget)),
    );
    let ((full, full_complete), (plane, plane_complete)) = (a?, b?);
    Ok(BoxCountResult { full, full_complete, plane, plane_complete })
}

pub const DESING_MAX_ERR: f64 = 0.05;
/// Pairs are drawn with planar distance in this range.
pub const DESING_RANGE: (f64, f64) = (0.25, 0.7);

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub point: Vec<f64>,
    pub growth: Vec<usize>,
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairRow {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    pub planar: f64,
    pub projected: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesingResult {
    pub growth: Vec<GrowthRow>,
    pub pairs: Vec<PairRow>,
    pub max_err: f64,
    pub unreachable: usize,
}

impl DesingResult {
    pub fn growth_ok(&self) -> bool {
        self.growth.iter().all(|r| r.growth == [2, 3] && r.regular)
    }

    pub fn pass(&self) -> bool {
        self.growth_ok() && !self.pairs.is_empty() && self.max_err <= DESING_MAX_ERR
    }
}

/// Lifted grid: `h = 2/(n_x − 1)` on `[−1, 1]` in x, `h^{α+1}/2^α` in y and
/// `h` in z, both centred at 0, so completed y-steps land on nodes.
pub fn lifted_grid(counts: &[usize], alpha: u32) -> Result<Grid, ExperimentError> {
    let h = 2.0 / (counts[0] - 1) as f64;
    let hy = h.powi(alpha as i32 + 1) / 2f64.powi(alpha as i32);
    let half = |n: usize, step: f64| step * (n - 1) as f64 / 2.0;
    let (ly, lz) = (half(counts[1], hy), half(counts[2], h));
    Ok(Grid::new(
        format!("lift-{}x{}x{}", counts[0], counts[1], counts[2]),
        vec![Axis::dirichlet(-1.0, 1.0, counts[0]), Axis::dirichlet(-ly, ly, counts[1]), Axis::dirichlet(-lz, lz, counts[2])],
    )?)
}

/// Sample points for the growth check: the origin, then seeded rationals
/// with `x = 0` for every fourth point.
fn growth_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    (0..n)
        .map(|i| {
            if i == 0 {
                return Point::exact_ints(&[0, 0, 0]);
            }
            let mut r = || rat_frac(rng.gen_range(-20..=20), rng.gen_range(1..=7));
            let (x, y, z) = (r(), r(), r());
            let x = if i % 4 == 0 { rat_frac(0, 1) } else { x };
            Point::Exact(vec![x, y, z])
        })
        .collect()
}

/// Equiregularity of the lifted Grushin structure and agreement of
/// projected 3-D distances with planar ones.
pub fn desing_check(cfg: &ScenarioConfig) -> Result<DesingResult, ExperimentError> {
    let alpha = cfg.alpha[0];
    let lift = desingularize_grushin(alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let growth: Vec<GrowthRow> = growth_points(cfg.points, &mut rng)
        .iter()
        .map(|q| {
            let f = compute_flag(&lift, q, alpha as usize + 3);
            GrowthRow { point: q.to_f64(), growth: f.growth_vector, regular: f.regular }
        })
        .collect();

    let g3 = lifted_grid(&cfg.grid, alpha)?;
    let g2 = Grid::new("planar", vec![g3.axis(0).clone(), g3.axis(1).clone()])?;
    let planar = SRStructure::grushin(alpha);
    let spec3 = StencilSpec::Completion { driving: vec![0, 2], radius: cfg.radius.clone() };
    let graph3 = StencilGraph::new(&lift, &g3, spec3, DEFAULT_ETA)?;
    let graph2 = StencilGraph::new(&planar, &g2, StencilSpec::Generic { radius: cfg.radius_alt.clone() }, DEFAULT_ETA)?;

    let (nx, ny, nz) = (g3.axis(0).count, g3.axis(1).count, g3.axis(2).count);
    let sources: Vec<[usize; 2]> = (0..cfg.sources)
        .map(|i| if i == 0 { [nx / 2, ny / 2] } else { [rng.gen_range(nx / 4..=3 * nx / 4), ny / 2] })
        .collect();
    let per = cfg.pairs / cfg.sources;
    let seeds: Vec<u64> = (0..cfg.sources).map(|_| rng.gen()).collect();
    let per_source: Vec<(Vec<PairRow>, usize)> = sources
        .par_iter()
        .zip(&seeds)
        .map(|(src, &seed)| {
            let d2 = graph2.distances(&[(g2.node_index(src), 0.0)], f64::INFINITY);
            let d3 = graph3.distances(&[(g3.node_index(&[src[0], src[1], nz / 2]), 0.0)], f64::INFINITY);
            let mut cand: Vec<usize> =
                (0..g2.n_nodes()).filter(|&p| !g2.is_wall_node(p) && d2[p] > DESING_RANGE.0 && d2[p] < DESING_RANGE.1).collect();
            cand.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            cand.truncate(per);
            cand.sort_unstable();
            let unreachable = d3.iter().filter(|d| d.is_infinite()).count();
            let rows = cand
                .into_iter()
                .map(|p| {
                    let m = g2.node_multi(p);
                    let projected = (0..nz).map(|k| d3[g3.node_index(&[m[0], m[1], k])]).fold(f64::INFINITY, f64::min);
                    PairRow {
                        source: g2.node_coords(g2.node_index(src)),
                        target: g2.node_coords(p),
                        planar: d2[p],
                        projected,
                        rel_err: (projected / d2[p] - 1.0).abs(),
                    }
                })
                .collect();
            (rows, unreachable)
        })
        .collect();
    let unreachable = per_source.iter().map(|(_, u)| *u).max().unwrap_or(0);
    let pairs: Vec<PairRow> = per_source.into_iter().flat_map(|(r, _)| r).collect();
    let max_err = pairs.iter().map(|p| p.rel_err).fold(0.0, f64::max);
    Ok(DesingResult { growth, pairs, max_err, unreachable })
}
