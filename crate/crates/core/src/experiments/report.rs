use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ScenarioId;
use super::ExperimentError;

/// Version of the JSON summary layout; see `schema/report.schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

/// The JSON schema shipped with the crate.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// One record table, written as one CSV file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Shortest text that parses back to the same float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Pass/fail against a named acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: ScenarioId,
    pub config_echo: String,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, f64>,
    /// Wall-clock seconds per stage; excluded from deterministic output.
    pub timings: Vec<(String, f64)>,
}

impl Report {
    pub fn new(scenario: ScenarioId, config_echo: String) -> Self {
        Report { scenario, config_echo, tables: Vec::new(), verdicts: Vec::new(), metrics: BTreeMap::new(), timings: Vec::new() }
    }

    pub fn verdict(&mut self, criterion: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict { criterion: criterion.into(), pass, detail: detail.into() });
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn csv_name(&self, t: &Table) -> String {
        format!("{}-{}.csv", self.scenario, t.name)
    }

    /// JSON summary. With `timings = false` the value depends only on the
    /// config and seed.
    pub fn summary_json(&self, timings: bool) -> serde_json::Value {
        let tables: Vec<serde_json::Value> = self
            .tables
            .iter()
            .map(|t| serde_json::json!({ "name": t.name, "file": self.csv_name(t), "columns": t.header, "rows": t.rows.len() }))
            .collect();
        let metrics: serde_json::Map<String, serde_json::Value> =
            self.metrics.iter().map(|(k, v)| (k.clone(), finite_or_null(*v))).collect();
        let mut out = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario.as_str(),
            "config": self.config_echo,
            "pass": self.all_pass(),
            "verdicts": self.verdicts,
            "metrics": metrics,
            "tables": tables,
        });
        if timings {
            let t: serde_json::Map<String, serde_json::Value> = self.timings.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
            out["timings"] = serde_json::Value::Object(t);
        }
        out
    }
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::Null
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Write one CSV per table and the JSON summary into `dir`; returns the
/// written paths in order.
pub fn emit_report(r: &Report, dir: &Path, formats: &[Format], timings: bool) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    if formats.contains(&Format::Csv) {
        for t in &r.tables {
            let path = dir.join(r.csv_name(t));
            let f = fs::File::create(&path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
            t.write_csv(f).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
    }
    if formats.contains(&Format::Json) {
        let path = dir.join(format!("{}-summary.json", r.scenario));
        let text = serde_json::to_string_pretty(&r.summary_json(timings)).expect("summary serializes");
        fs::write(&path, text + "\n").map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

/// Kendall's τ-a of a sequence against its index order.
pub fn kendall_tau(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

/// `max / min` of positive values; `∞` if any value is not positive.
pub fn band(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}
