use std::f64::consts::PI;

use rayon::prelude::*;

use crate::discretize::{assemble_riemannian_blend, assemble_schrodinger_1d, assemble_sublaplacian, build_grid, Potential};
use crate::eigensolve::{axis_constant_sector, fourier_spectrum, smallest_eigenpairs_with, EigenPair, SolverOptions};
use crate::nodal::{courant_check, nodal_decomposition, CourantReport, NodalDecomposition, DEFAULT_ZERO_TOL};
use crate::srgeom::{least_squares_slope, nodal_density_statistic, DensityOptions, StencilGraph, StencilSpec, DEFAULT_ETA};
use crate::vf_algebra::{Rational, SRStructure, VectorField};

use super::config::ScenarioConfig;
use super::ExperimentError;

pub(crate) fn solver(cfg: &ScenarioConfig) -> SolverOptions {
    SolverOptions { seed: cfg.seed, ..SolverOptions::default() }
}

/// Ground pair of `−d²/dx² + V` with `n` interior nodes.
pub fn ground_state(pot: Potential, interval: (f64, f64), n: usize, tol: f64) -> Result<EigenPair, ExperimentError> {
    let op = assemble_schrodinger_1d(pot, interval, n)?;
    Ok(smallest_eigenpairs_with(&op, 1, tol, &SolverOptions::default())?.remove(0))
}

/// Half-width of the Heisenberg slab in x.
pub fn heisenberg_half_width() -> f64 {
    (PI / 2.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub alpha: u32,
    pub k: Vec<u32>,
    pub mu: Vec<f64>,
    pub slope: f64,
    pub target: f64,
}

impl ScalingFit {
    pub fn rel_err(&self) -> f64 {
        (self.slope / self.target - 1.0).abs()
    }
}

/// Ground values `μ_k` of `−∂x² + k² x^{2α}` on `(−1, 1)` and the log-log slope
/// of `μ_k` against `k`.
pub fn grushin_scaling(cfg: &ScenarioConfig) -> Result<Vec<ScalingFit>, ExperimentError> {
    cfg.alpha
        .iter()
        .map(|&alpha| {
            let mu: Vec<f64> = cfg
                .k
                .par_iter()
                .map(|&k| Ok(ground_state(Potential::Power { k: k as f64, alpha }, (-1.0, 1.0), cfg.n, cfg.tol)?.value))
                .collect::<Result<_, ExperimentError>>()?;
            let lk: Vec<f64> = cfg.k.iter().map(|&k| (k as f64).ln()).collect();
            let lm: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
            Ok(ScalingFit { alpha, k: cfg.k.clone(), slope: least_squares_slope(&lk, &lm), mu, target: 2.0 / (alpha as f64 + 1.0) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumHit {
    pub m: u32,
    pub target: f64,
    /// Closest computed eigenvalue, `NaN` if none lies in the window.
    pub value: f64,
    pub rel_err: f64,
    /// Eigenvalues within the 3 % window.
    pub window: usize,
    /// `‖P φ‖ / ‖φ‖` with `P` the projector onto the window eigenvectors.
    pub cosine: f64,
    /// Largest residual of the lifted window eigenpairs against the full
    /// operator.
    pub residual: f64,
}

/// Relative window around a target eigenvalue.
pub const SPECTRUM_WINDOW: f64 = 0.03;

/// `φ_{1,m}` (or `sin(√(2π) x)` for `m = 0`) on Heisenberg coordinates.
pub fn phi_1(m: u32, x: &[f64]) -> f64 {
    let c = (2.0 * PI).sqrt();
    if m == 0 {
        (c * x[0]).sin()
    } else {
        (c * x[0]).sin() * (c * m as f64 * x[1]).sin()
    }
}

/// Lowest `modes` eigenpairs of the z-constant sector of the 3-D Heisenberg
/// operator, lifted to the full grid, matched against `2π(1 + m²)`.
pub fn heisenberg_spectrum(cfg: &ScenarioConfig) -> Result<(Vec<SpectrumHit>, Vec<f64>), ExperimentError> {
    let h = SRStructure::heisenberg();
    let g = build_grid(h.domain(), &cfg.grid)?;
    let a = assemble_sublaplacian(&h, &g)?;
    let sector = axis_constant_sector(&a, &g, 2)?;
    let pairs = smallest_eigenpairs_with(&sector.reduced, cfg.modes, cfg.tol, &solver(cfg))?;
    let lifted: Vec<EigenPair> = pairs.par_iter().map(|p| sector.lift_pair(&a, p)).collect::<Result<_, _>>()?;
    let values: Vec<f64> = lifted.iter().map(|p| p.value).collect();
    let hits = cfg
        .spectrum_m
        .iter()
        .map(|&m| {
            let target = 2.0 * PI * (1.0 + (m as f64).powi(2));
            let inside: Vec<&EigenPair> = lifted.iter().filter(|p| (p.value / target - 1.0).abs() <= SPECTRUM_WINDOW).collect();
            let phi = g.sample_unknowns(|x| phi_1(m, x));
            let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let proj: f64 = inside.iter().map(|p| p.vector.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>().powi(2)).sum();
            let best = inside.iter().map(|p| p.value).min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()));
            let value = best.unwrap_or(f64::NAN);
            SpectrumHit {
                m,
                target,
                value,
                rel_err: (value / target - 1.0).abs(),
                window: inside.len(),
                cosine: proj.sqrt() / norm,
                residual: inside.iter().map(|p| p.residual).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok((hits, values))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorRow {
    pub m: u32,
    pub lambda: f64,
    pub rel_err: f64,
}

/// Ground values `λ_{2,m}` of `−d²/dx² + m² x²` on the Heisenberg x-interval.
pub fn oscillator_ground(cfg: &ScenarioConfig) -> Result<Vec<OscillatorRow>, ExperimentError> {
    let a = heisenberg_half_width();
    cfg.oscillator_m
        .par_iter()
        .map(|&m| {
            let lambda = ground_state(Potential::Harmonic { m: m as f64 }, (-a, a), cfg.n, 1e-12)?.value;
            Ok(OscillatorRow { m, lambda, rel_err: (lambda / m as f64 - 1.0).abs() })
        })
        .collect()
}

/// Extra modes computed beyond the checked ones, so that multiplicities of
/// the last checked clusters are complete.
pub const COURANT_GUARD: usize = 10;

fn truncated(rep: CourantReport, modes: usize) -> CourantReport {
    let rows: Vec<_> = rep.rows.into_iter().take(modes).collect();
    let violations = rows.iter().filter(|r| !r.pass).count();
    let strong_violations = rows.iter().filter(|r| !r.strong_pass).count();
    CourantReport { rows, violations, strong_violations }
}

fn courant_for(pairs: &[EigenPair], g: &crate::discretize::Grid, modes: usize) -> Result<CourantReport, ExperimentError> {
    let decs: Vec<NodalDecomposition> =
        pairs.par_iter().map(|p| nodal_decomposition(g, &p.vector, DEFAULT_ZERO_TOL)).collect::<Result<_, _>>()?;
    Ok(truncated(courant_check(pairs, &decs), modes))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CourantResult {
    pub grushin: CourantReport,
    pub heisenberg: CourantReport,
}

/// Nodal counts of the first `modes` eigenfunctions of the Grushin strip
/// (generic solver) and of the Heisenberg slab (Fourier blocks).
pub fn courant(cfg: &ScenarioConfig) -> Result<CourantResult, ExperimentError> {
    let k = cfg.modes + COURANT_GUARD;
    let s = SRStructure::grushin(cfg.alpha[0]);
    let g = build_grid(s.domain(), &cfg.grid)?;
    let a = assemble_sublaplacian(&s, &g)?;
    let pairs = smallest_eigenpairs_with(&a, k, cfg.tol, &solver(cfg))?;
    let grushin = courant_for(&pairs, &g, cfg.modes)?;

    let h = SRStructure::heisenberg();
    let gh = build_grid(h.domain(), &cfg.grid_alt)?;
    let ah = assemble_sublaplacian(&h, &gh)?;
    let pairs: Vec<EigenPair> = fourier_spectrum(&ah, &gh, k)?.into_iter().map(|(p, _)| p).collect();
    let heisenberg = courant_for(&pairs, &gh, cfg.modes)?;
    Ok(CourantResult { grushin, heisenberg })
}

/// The structure with `ε ∂_j` appended for every coordinate, whose distance
/// is that of the blended operator `Δ_sR + ε² Δ`.
pub fn blended_structure(s: &SRStructure, eps: f64) -> Result<SRStructure, ExperimentError> {
    if eps == 0.0 {
        return Ok(s.clone());
    }
    let e = Rational::from_float(eps).expect("finite blend parameter");
    let mut fields = s.fields().to_vec();
    fields.extend((0..s.dim()).map(|j| VectorField::partial(s.dim(), j).scale(&e)));
    Ok(SRStructure::new(format!("{}+blend", s.name), fields, s.density().clone(), s.domain().to_vec())?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannRow {
    pub eps: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Nodal density of the second eigenfunction.
    pub rho: f64,
    pub rho_times_sqrt_lambda: f64,
}

/// Sweep of the Riemannian blend on the Grushin strip.
pub fn riemannian_limit(cfg: &ScenarioConfig) -> Result<Vec<RiemannRow>, ExperimentError> {
    let s = SRStructure::grushin(cfg.alpha[0]);
    let g = build_grid(s.domain(), &cfg.grid)?;
    cfg.eps
        .par_iter()
        .map(|&eps| {
            let a = assemble_riemannian_blend(&s, &g, eps)?;
            let pairs = smallest_eigenpairs_with(&a, cfg.modes.max(2), cfg.tol, &solver(cfg))?;
            let blended = blended_structure(&s, eps)?;
            let graph = StencilGraph::new(&blended, &g, StencilSpec::Generic { radius: cfg.radius.clone() }, DEFAULT_ETA)?;
            let dec = nodal_decomposition(&g, &pairs[1].vector, DEFAULT_ZERO_TOL)?;
            let rho = nodal_density_statistic(&blended, &graph, &dec, &DensityOptions { margin: cfg.margin, eta: DEFAULT_ETA })?.rho;
            Ok(RiemannRow {
                eps,
                lambda1: pairs[0].value,
                lambda2: pairs[1].value,
                rho,
                rho_times_sqrt_lambda: rho * pairs[1].value.sqrt(),
            })
        })
        .collect()
}
