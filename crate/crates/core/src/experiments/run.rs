use std::time::{Duration, Instant};

use super::config::{ScenarioConfig, ScenarioId};
use super::geometry::{
    ball_box, ball_box_pass, box_counting, desing_check, nodal_density, BALL_BOX_MAX_RATIO, BOX_COUNT_TOL, DENSITY_BAND,
    DENSITY_TAU, DESING_MAX_ERR,
};
use super::report::{num, Report, Table};
use super::spectra::{courant, grushin_scaling, heisenberg_spectrum, oscillator_ground, riemannian_limit, SPECTRUM_WINDOW};
use super::symbolic::{flag_rows, symbolic_suite};
use super::yau::{yau_scaling, YAU_BAND};
use super::ExperimentError;

/// Wall-clock budgets of the timed criteria.
pub const SPECTRUM_BUDGET: Duration = Duration::from_secs(600);
pub const OSCILLATOR_BUDGET: Duration = Duration::from_secs(10);
pub const SCALING_BUDGET: Duration = Duration::from_secs(30);
pub const SYMBOLIC_BUDGET: Duration = Duration::from_secs(5);

/// Minimum eigenvector cosine against the analytic mode.
pub const SPECTRUM_COSINE: f64 = 0.98;
pub const OSCILLATOR_TOL: f64 = 0.02;
pub const SCALING_TOL: f64 = 0.05;

fn timed<T>(r: &mut Report, stage: &str, f: impl FnOnce() -> Result<T, ExperimentError>) -> Result<(T, Duration), ExperimentError> {
    let t = Instant::now();
    let out = f()?;
    let dt = t.elapsed();
    r.timings.push((stage.into(), dt.as_secs_f64()));
    Ok((out, dt))
}

fn within(dt: Duration, budget: Duration) -> (bool, String) {
    (dt <= budget, format!("{:.2}s of {}s", dt.as_secs_f64(), budget.as_secs()))
}

/// Runs one scenario. Module errors come back wrapped with the scenario id.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report, ExperimentError> {
    cfg.validate()?;
    let mut r = Report::new(cfg.scenario, cfg.echo());
    run_inner(cfg, &mut r).map_err(|e| ExperimentError::Scenario { scenario: cfg.scenario, source: Box::new(e) })?;
    Ok(r)
}

fn run_inner(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    match cfg.scenario {
        ScenarioId::GrushinScaling => scaling(cfg, r),
        ScenarioId::HeisenbergYau => heisenberg_yau(cfg, r),
        ScenarioId::Density => density(cfg, r),
        ScenarioId::Courant => courant_bound(cfg, r),
        ScenarioId::BallBox => ballbox(cfg, r),
        ScenarioId::BoxCount => boxcount(cfg, r),
        ScenarioId::DesingCheck => desing(cfg, r),
        ScenarioId::RiemannianLimit => riemann(cfg, r),
        ScenarioId::FlagReport => flags(cfg, r),
    }
}

fn scaling(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (fits, dt) = timed(r, "grushin_scaling", || grushin_scaling(cfg))?;
    let mut t = Table::new("mu", &["alpha", "k", "mu"]);
    let mut fit_t = Table::new("fit", &["alpha", "slope", "target", "rel_err"]);
    for f in &fits {
        for (k, mu) in f.k.iter().zip(&f.mu) {
            t.push(vec![f.alpha.to_string(), k.to_string(), num(*mu)]);
        }
        fit_t.push(vec![f.alpha.to_string(), num(f.slope), num(f.target), num(f.rel_err())]);
        r.metric(&format!("slope_alpha{}", f.alpha), f.slope);
    }
    let worst = fits.iter().map(|f| f.rel_err()).fold(0.0, f64::max);
    let (fast, time) = within(dt, SCALING_BUDGET);
    r.verdict("grushin_scaling", worst <= SCALING_TOL && fast, format!("worst exponent error {worst:.4} (≤ {SCALING_TOL}), {time}"));
    r.tables.extend([t, fit_t]);
    Ok(())
}

fn heisenberg_yau(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let ((hits, values), dt) = timed(r, "heisenberg_spectrum", || heisenberg_spectrum(cfg))?;
    let mut t = Table::new("spectrum", &["m", "target", "value", "rel_err", "window", "cosine", "residual"]);
    for h in &hits {
        t.push(vec![
            h.m.to_string(),
            num(h.target),
            num(h.value),
            num(h.rel_err),
            h.window.to_string(),
            num(h.cosine),
            num(h.residual),
        ]);
    }
    r.tables.push(t);
    let mut ev = Table::new("eigenvalues", &["index", "value"]);
    for (i, v) in values.iter().enumerate() {
        ev.push(vec![i.to_string(), num(*v)]);
    }
    r.tables.push(ev);
    let ok = hits.iter().all(|h| h.rel_err <= SPECTRUM_WINDOW && h.cosine >= SPECTRUM_COSINE);
    let worst_rel = hits.iter().map(|h| h.rel_err).fold(0.0, f64::max);
    let worst_cos = hits.iter().map(|h| h.cosine).fold(1.0, f64::min);
    let (fast, time) = within(dt, SPECTRUM_BUDGET);
    r.metric("spectrum_worst_rel_err", worst_rel);
    r.metric("spectrum_worst_cosine", worst_cos);
    r.verdict(
        "heisenberg_spectrum",
        ok && fast,
        format!("worst rel err {worst_rel:.4} (≤ {SPECTRUM_WINDOW}), worst cosine {worst_cos:.4} (≥ {SPECTRUM_COSINE}), {time}"),
    );

    let (osc, dt) = timed(r, "oscillator_ground", || oscillator_ground(cfg))?;
    let mut t = Table::new("oscillator", &["m", "lambda", "rel_err"]);
    for o in &osc {
        t.push(vec![o.m.to_string(), num(o.lambda), num(o.rel_err)]);
    }
    r.tables.push(t);
    let worst = osc.iter().map(|o| o.rel_err).fold(0.0, f64::max);
    let (fast, time) = within(dt, OSCILLATOR_BUDGET);
    r.metric("oscillator_worst_rel_err", worst);
    r.verdict("oscillator_ground", worst <= OSCILLATOR_TOL && fast, format!("worst |λ/m − 1| {worst:.4} (≤ {OSCILLATOR_TOL}), {time}"));

    let (yau, _) = timed(r, "yau_scaling", || yau_scaling(cfg))?;
    let mut t = Table::new(
        "yau",
        &[
            "m",
            "lambda1",
            "lambda2",
            "sheets1_torus",
            "sheets1_cell",
            "sheets2_cell",
            "sheets2_torus",
            "proxy1",
            "proxy2",
            "ratio1",
            "ratio2",
        ],
    );
    for y in &yau.rows {
        t.push(vec![
            y.m.to_string(),
            num(y.lambda1),
            num(y.lambda2),
            y.sheets1_torus.to_string(),
            y.sheets1_cell.to_string(),
            y.sheets2_cell.to_string(),
            y.sheets2_torus.to_string(),
            num(y.proxy1),
            num(y.proxy2),
            num(y.ratio1()),
            num(y.ratio2()),
        ]);
    }
    r.tables.push(t);
    r.metric("yau_band1", yau.band1);
    r.metric("yau_band2", yau.band2);
    r.verdict(
        "yau_scaling",
        yau.pass(),
        format!(
            "counts {}, band φ1 {:.3}, band φ2 {:.3} (≤ {YAU_BAND})",
            if yau.counts_ok { "match 2m+1 / 2m−1" } else { "mismatch" },
            yau.band1,
            yau.band2
        ),
    );
    Ok(())
}

fn density(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (d, _) = timed(r, "nodal_density", || nodal_density(cfg))?;
    let mut t = Table::new("density", &["k", "eigenvalue", "rho", "rho_times_sqrt_lambda"]);
    for row in &d.rows {
        t.push(vec![row.k.to_string(), num(row.eigenvalue), num(row.rho), num(row.rho_times_sqrt_lambda)]);
    }
    r.tables.push(t);
    r.metric("density_band", d.band);
    r.metric("density_tau", d.tau);
    r.verdict(
        "nodal_density",
        d.pass(),
        format!("band {:.3} (≤ {DENSITY_BAND}), Kendall τ {:.3} (|τ| ≤ {DENSITY_TAU})", d.band, d.tau),
    );
    Ok(())
}

fn courant_bound(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (c, _) = timed(r, "courant", || courant(cfg))?;
    let mut t = Table::new("courant", &["structure", "mode_index", "eigenvalue", "mult", "domain_count", "courant_bound", "pass", "strong_pass"]);
    for (name, rep) in [("grushin", &c.grushin), ("heisenberg", &c.heisenberg)] {
        for row in &rep.rows {
            t.push(vec![
                name.into(),
                row.mode_index.to_string(),
                num(row.eigenvalue),
                row.mult.to_string(),
                row.domain_count.to_string(),
                row.courant_bound.to_string(),
                row.pass.to_string(),
                row.strong_pass.to_string(),
            ]);
        }
        r.metric(&format!("{name}_violations"), rep.violations as f64);
        r.metric(&format!("{name}_strong_violations"), rep.strong_violations as f64);
    }
    r.tables.push(t);
    r.verdict(
        "courant_bound",
        c.grushin.pass() && c.heisenberg.pass(),
        format!(
            "violations grushin {} heisenberg {}; strong (≤ n) violations grushin {} heisenberg {}",
            c.grushin.violations, c.heisenberg.violations, c.grushin.strong_violations, c.heisenberg.strong_violations
        ),
    );
    Ok(())
}

fn ballbox(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (reports, _) = timed(r, "ball_box", || ball_box(cfg))?;
    let mut t = Table::new("ballbox", &["alpha", "eps", "inner", "outer", "ratio", "nodes_in_ball", "truncated"]);
    let mut pass = true;
    let mut detail = Vec::new();
    for (alpha, rep) in cfg.alpha.iter().zip(&reports) {
        for row in &rep.rows {
            t.push(vec![
                alpha.to_string(),
                num(row.eps),
                num(row.inner),
                num(row.outer),
                num(row.ratio),
                row.nodes_in_ball.to_string(),
                row.truncated.to_string(),
            ]);
        }
        pass &= ball_box_pass(rep);
        r.metric(&format!("max_ratio_alpha{alpha}"), rep.max_ratio());
        detail.push(format!("α={alpha} weights {:?} max ratio {:.3}", rep.weights, rep.max_ratio()));
    }
    r.tables.push(t);
    r.verdict("ball_box", pass, format!("{} (≤ {BALL_BOX_MAX_RATIO})", detail.join(", ")));
    Ok(())
}

fn boxcount(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (b, _) = timed(r, "box_counting", || box_counting(cfg))?;
    for (name, bc) in [("full", &b.full), ("plane", &b.plane)] {
        let mut t = Table::new(name, &["epsilon", "count", "proxy"]);
        for (i, e) in bc.eps.iter().enumerate() {
            let count = bc.counts[i].map_or_else(String::new, |c| c.to_string());
            let proxy = bc.counts[i].map_or_else(String::new, |c| num((c as f64).ln() / (1.0 / e).ln()));
            t.push(vec![num(*e), count, proxy]);
        }
        r.tables.push(t);
        r.metric(&format!("{name}_slope"), bc.slope);
    }
    r.verdict(
        "box_counting",
        b.pass(),
        format!(
            "box slope {:.3} (4 ± {BOX_COUNT_TOL}{}), plane slope {:.3} (3 ± {BOX_COUNT_TOL}{})",
            b.full.slope,
            if b.full_complete { "" } else { ", budget exhausted" },
            b.plane.slope,
            if b.plane_complete { "" } else { ", budget exhausted" },
        ),
    );
    Ok(())
}

fn desing(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (d, _) = timed(r, "desingularization", || desing_check(cfg))?;
    let mut t = Table::new("growth", &["x", "y", "z", "growth", "regular"]);
    for g in &d.growth {
        let growth: Vec<String> = g.growth.iter().map(|n| n.to_string()).collect();
        t.push(vec![num(g.point[0]), num(g.point[1]), num(g.point[2]), growth.join(" "), g.regular.to_string()]);
    }
    r.tables.push(t);
    let mut t = Table::new("pairs", &["sx", "sy", "tx", "ty", "planar", "projected", "rel_err"]);
    for p in &d.pairs {
        t.push(vec![
            num(p.source[0]),
            num(p.source[1]),
            num(p.target[0]),
            num(p.target[1]),
            num(p.planar),
            num(p.projected),
            num(p.rel_err),
        ]);
    }
    r.tables.push(t);
    r.metric("desing_max_err", d.max_err);
    r.verdict(
        "desingularization",
        d.pass(),
        format!(
            "growth (2,3) at {}/{} points, {} pairs with max rel err {:.4} (≤ {DESING_MAX_ERR}), {} unreachable",
            d.growth.iter().filter(|g| g.growth == [2, 3] && g.regular).count(),
            d.growth.len(),
            d.pairs.len(),
            d.max_err,
            d.unreachable
        ),
    );
    Ok(())
}

fn riemann(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let (rows, _) = timed(r, "riemannian_limit", || riemannian_limit(cfg))?;
    let mut t = Table::new("blend", &["eps", "lambda1", "lambda2", "rho", "rho_times_sqrt_lambda"]);
    for row in &rows {
        t.push(vec![num(row.eps), num(row.lambda1), num(row.lambda2), num(row.rho), num(row.rho_times_sqrt_lambda)]);
    }
    r.tables.push(t);
    Ok(())
}

fn flags(cfg: &ScenarioConfig, r: &mut Report) -> Result<(), ExperimentError> {
    let mut t = Table::new("flags", &["structure", "point", "growth_vector", "step", "weights", "homogeneous_dimension", "regular"]);
    let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for row in flag_rows(&cfg.alpha) {
        let point: Vec<String> = row.point.iter().map(|x| num(*x)).collect();
        t.push(vec![
            row.structure,
            point.join(" "),
            join(&row.flag.growth_vector),
            row.flag.step.to_string(),
            join(&row.flag.weights),
            row.flag.homogeneous_dimension.to_string(),
            row.flag.regular.to_string(),
        ]);
    }
    r.tables.push(t);
    let (checks, dt) = timed(r, "symbolic_suite", || symbolic_suite(cfg.seed))?;
    let mut t = Table::new("symbolic", &["check", "pass", "detail"]);
    for c in &checks {
        t.push(vec![c.name.clone(), c.pass.to_string(), c.detail.clone()]);
    }
    r.tables.push(t);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let (fast, time) = within(dt, SYMBOLIC_BUDGET);
    let detail = if failed.is_empty() {
        format!("{} checks exact, {time}", checks.len())
    } else {
        format!("failed: {}, {time}", failed.join(", "))
    };
    r.verdict("symbolic_suite", failed.is_empty() && fast, detail);
    Ok(())
}
