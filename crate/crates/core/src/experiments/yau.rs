use std::f64::consts::PI;

use rayon::prelude::*;

use crate::discretize::{schrodinger_grid, Axis, Grid, Potential};
use crate::nodal::{sign_changes, DEFAULT_ZERO_TOL};
use crate::srgeom::horizontal_perimeter_proxy;
use crate::vf_algebra::SRStructure;

use super::config::ScenarioConfig;
use super::report::band;
use super::spectra::{ground_state, heisenberg_half_width, phi_1};
use super::ExperimentError;

/// Largest allowed `max/min` of each measure-proxy ratio sequence.
pub const YAU_BAND: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct YauRow {
    pub m: u32,
    /// `2π(1 + m²)`.
    pub lambda1: f64,
    /// Ground value of the 1-D oscillator with frequency `m`.
    pub lambda2: f64,
    /// Sheets of `Z(φ_{1,m})` on the torus (periodic y read circularly).
    pub sheets1_torus: usize,
    /// Same, on the cell `y ∈ [0, √(2π))` without the identified endpoint.
    pub sheets1_cell: usize,
    /// Sheets of `Z(φ_{2,m})` on the cell `z ∈ [−π, π)`.
    pub sheets2_cell: usize,
    pub sheets2_torus: usize,
    pub proxy1: f64,
    pub proxy2: f64,
}

impl YauRow {
    pub fn ratio1(&self) -> f64 {
        self.proxy1 / self.lambda1.sqrt()
    }

    pub fn ratio2(&self) -> f64 {
        self.proxy2 / self.lambda2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YauResult {
    pub rows: Vec<YauRow>,
    pub band1: f64,
    pub band2: f64,
    pub counts_ok: bool,
}

impl YauResult {
    pub fn pass(&self) -> bool {
        let positive = self.rows.iter().all(|r| r.ratio2() > 0.0 && r.ratio1() > 0.0);
        self.counts_ok && positive && self.band1 <= YAU_BAND && self.band2 <= YAU_BAND
    }
}

/// Grid of the Yau experiment: the Heisenberg slab with `z ∈ [−π, π)`.
pub fn yau_grid(counts: &[usize]) -> Result<Grid, ExperimentError> {
    let a = heisenberg_half_width();
    Ok(Grid::new(
        format!("yau-{}x{}x{}", counts[0], counts[1], counts[2]),
        vec![
            Axis::dirichlet(-a, a, counts[0]),
            Axis::periodic(0.0, (2.0 * PI).sqrt(), counts[1]),
            Axis::periodic(-PI, 2.0 * PI, counts[2]),
        ],
    )?)
}

/// Piecewise-linear interpolant of interior values on a Dirichlet grid.
fn interpolate(lo: f64, h: f64, inner: &[f64], x: f64) -> f64 {
    let t = (x - lo) / h;
    let i = t.floor();
    let at = |j: f64| {
        if j < 1.0 || j as usize > inner.len() {
            0.0
        } else {
            inner[j as usize - 1]
        }
    };
    let f = t - i;
    (1.0 - f) * at(i) + f * at(i + 1.0)
}

/// Sign changes of `f` along the line through `at` parallel to `axis`.
fn line_changes(g: &Grid, f: &dyn Fn(&[f64]) -> f64, axis: usize, at: &[usize], circular: bool) -> usize {
    let ax = g.axis(axis);
    let mut x: Vec<f64> = at.iter().zip(g.axes()).map(|(&i, a)| a.coord(i)).collect();
    let mut vals = Vec::new();
    for i in 0..ax.count {
        if ax.is_wall(i) {
            continue;
        }
        x[axis] = ax.coord(i);
        vals.push(f(&x));
    }
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    sign_changes(&vals, circular, DEFAULT_ZERO_TOL * vmax)
}

/// Analytic `φ_{1,m}` and `φ_{2,m} = ψ_m(x) sin(m z)` on the Yau grid: sheet
/// counts from sign changes along generic coordinate lines, and horizontal
/// perimeter proxies of the nodal sets.
pub fn yau_scaling(cfg: &ScenarioConfig) -> Result<YauResult, ExperimentError> {
    let h = SRStructure::heisenberg();
    let g = yau_grid(&cfg.grid_alt)?;
    let a = heisenberg_half_width();
    let fine = schrodinger_grid(-a, a, cfg.n)?;
    let (flo, fh) = (fine.axis(0).lo, fine.axis(0).h);
    // generic line positions: off every nodal sheet of the sampled m
    let [cx, cy, cz] = [g.axis(0).count / 3 + 1, g.axis(1).count / 7 + 1, g.axis(2).count / 5 + 1];
    let rows: Vec<YauRow> = cfg
        .m
        .par_iter()
        .map(|&m| {
            let ground = ground_state(Potential::Harmonic { m: m as f64 }, (-a, a), cfg.n, 1e-12)?;
            let psi = ground.vector;
            let mf = m as f64;
            let f1 = |x: &[f64]| phi_1(m, x);
            let f2 = |x: &[f64]| interpolate(flo, fh, &psi, x[0]) * (mf * x[2]).sin();
            let count = |f: &dyn Fn(&[f64]) -> f64, circular: bool| {
                line_changes(&g, f, 0, &[0, cy, cz], false)
                    + line_changes(&g, f, 1, &[cx, 0, cz], circular)
                    + line_changes(&g, f, 2, &[cx, cy, 0], circular)
            };
            let v1 = g.sample_unknowns(f1);
            let v2 = g.sample_unknowns(f2);
            Ok(YauRow {
                m,
                lambda1: 2.0 * PI * (1.0 + mf * mf),
                lambda2: ground.value,
                sheets1_torus: count(&f1, true),
                sheets1_cell: count(&f1, false),
                sheets2_cell: count(&f2, false),
                sheets2_torus: count(&f2, true),
                proxy1: horizontal_perimeter_proxy(&h, &g, &v1)?,
                proxy2: horizontal_perimeter_proxy(&h, &g, &v2)?,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let counts_ok = rows.iter().all(|r| r.sheets1_torus == 2 * r.m as usize + 1 && r.sheets2_cell == 2 * r.m as usize - 1);
    let band1 = band(&rows.iter().map(YauRow::ratio1).collect::<Vec<_>>());
    let band2 = band(&rows.iter().map(YauRow::ratio2).collect::<Vec<_>>());
    Ok(YauResult { rows, band1, band2, counts_ok })
}
