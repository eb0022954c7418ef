use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Largest grid (node count) a scenario may request.
pub const MAX_GRID_NODES: usize = 4_000_000;
/// Largest 1-D Schrödinger discretization.
pub const MAX_1D_NODES: usize = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    GrushinScaling,
    HeisenbergYau,
    Density,
    Courant,
    BallBox,
    BoxCount,
    DesingCheck,
    RiemannianLimit,
    FlagReport,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::GrushinScaling,
        ScenarioId::HeisenbergYau,
        ScenarioId::Density,
        ScenarioId::Courant,
        ScenarioId::BallBox,
        ScenarioId::BoxCount,
        ScenarioId::DesingCheck,
        ScenarioId::RiemannianLimit,
        ScenarioId::FlagReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::GrushinScaling => "grushin-scaling",
            ScenarioId::HeisenbergYau => "heisenberg-yau",
            ScenarioId::Density => "density",
            ScenarioId::Courant => "courant",
            ScenarioId::BallBox => "ballbox",
            ScenarioId::BoxCount => "boxcount",
            ScenarioId::DesingCheck => "desing-check",
            ScenarioId::RiemannianLimit => "riemannian-limit",
            ScenarioId::FlagReport => "flag-report",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid config: {0}")]
    Constraint(String),
}

/// Validated scenario parameters. Every scenario reads the subset it needs;
/// the rest keep their defaults and are echoed unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    /// Grushin exponents.
    pub alpha: Vec<u32>,
    /// Fourier modes `k` of the Grushin strip.
    pub k: Vec<u32>,
    /// Yau-sequence indices.
    pub m: Vec<u32>,
    /// Indices `m` of `2π(1 + m²)` looked up in the 3-D spectrum.
    pub spectrum_m: Vec<u32>,
    /// Frequencies of the 1-D oscillator check.
    pub oscillator_m: Vec<u32>,
    /// Interior nodes of 1-D Schrödinger operators.
    pub n: usize,
    /// Node counts of the main grid (Dirichlet counts include walls).
    pub grid: Vec<usize>,
    /// Node counts of the secondary grid.
    pub grid_alt: Vec<usize>,
    pub eps: Vec<f64>,
    pub modes: usize,
    pub tol: f64,
    /// Stencil radius per axis (driving axes in completion mode).
    pub radius: Vec<usize>,
    pub radius_alt: Vec<usize>,
    pub margin: f64,
    pub window_nodes: usize,
    pub budget: usize,
    pub points: usize,
    pub sources: usize,
    pub pairs: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

const KEYS: [&str; 22] = [
    "scenario",
    "alpha",
    "k",
    "m",
    "spectrum_m",
    "oscillator_m",
    "n",
    "grid",
    "grid_alt",
    "eps",
    "modes",
    "tol",
    "radius",
    "radius_alt",
    "margin",
    "window_nodes",
    "budget",
    "points",
    "sources",
    "pairs",
    "seed",
    "out",
];

pub const DEFAULT_SEED: u64 = 20_240_917;

fn range(a: u32, b: u32) -> Vec<u32> {
    (a..=b).collect()
}

impl ScenarioConfig {
    /// Documented defaults of a scenario.
    pub fn defaults(scenario: ScenarioId) -> Self {
        let mut c = ScenarioConfig {
            scenario,
            alpha: vec![1],
            k: range(8, 64),
            m: range(2, 12),
            spectrum_m: range(0, 3),
            oscillator_m: vec![16, 32, 64],
            n: 2048,
            grid: vec![64, 64],
            grid_alt: vec![32, 32, 48],
            eps: vec![0.05, 0.1, 0.2, 0.4],
            modes: 30,
            tol: 1e-8,
            radius: vec![2, 2],
            radius_alt: vec![2, 40],
            margin: 0.2,
            window_nodes: 256,
            budget: 20_000,
            points: 20,
            sources: 5,
            pairs: 50,
            seed: DEFAULT_SEED,
            out: None,
        };
        match scenario {
            ScenarioId::GrushinScaling => {
                c.tol = 1e-10;
            }
            ScenarioId::HeisenbergYau => {
                c.grid = vec![48, 48, 64];
                c.grid_alt = vec![33, 128, 128];
                c.n = 4096;
                c.modes = 40;
                c.tol = 1e-6;
            }
            ScenarioId::Density => {
                c.k = range(4, 32);
                c.grid = vec![129, 512];
                c.n = 127;
            }
            ScenarioId::Courant => {
                c.tol = 1e-7;
            }
            ScenarioId::BallBox => {
                c.alpha = vec![1, 2];
                c.eps = (0..7).map(|j| 0.05 * 2f64.powf(j as f64 / 2.0)).collect();
                c.radius = vec![3, 3];
            }
            ScenarioId::BoxCount => {
                c.grid = vec![48, 48, 48];
                c.eps = vec![0.8, 0.4, 0.2, 0.1];
            }
            ScenarioId::DesingCheck => {
                c.grid = vec![61, 433, 49];
                c.radius = vec![3, 3];
            }
            ScenarioId::RiemannianLimit => {
                c.eps = vec![0.0, 0.1, 0.2, 0.5, 1.0];
                c.modes = 2;
                c.tol = 1e-7;
            }
            ScenarioId::FlagReport => {
                c.alpha = vec![1, 2];
            }
        }
        c
    }

    /// `key = value` lines that parse back to an identical config.
    pub fn echo(&self) -> String {
        fn list<T: fmt::Debug>(v: &[T]) -> String {
            v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
        }
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "alpha = {}", list(&self.alpha));
        let _ = writeln!(s, "k = {}", list(&self.k));
        let _ = writeln!(s, "m = {}", list(&self.m));
        let _ = writeln!(s, "spectrum_m = {}", list(&self.spectrum_m));
        let _ = writeln!(s, "oscillator_m = {}", list(&self.oscillator_m));
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "grid = {}", list(&self.grid));
        let _ = writeln!(s, "grid_alt = {}", list(&self.grid_alt));
        let _ = writeln!(s, "eps = {}", list(&self.eps));
        let _ = writeln!(s, "modes = {}", self.modes);
        let _ = writeln!(s, "tol = {:?}", self.tol);
        let _ = writeln!(s, "radius = {}", list(&self.radius));
        let _ = writeln!(s, "radius_alt = {}", list(&self.radius_alt));
        let _ = writeln!(s, "margin = {:?}", self.margin);
        let _ = writeln!(s, "window_nodes = {}", self.window_nodes);
        let _ = writeln!(s, "budget = {}", self.budget);
        let _ = writeln!(s, "points = {}", self.points);
        let _ = writeln!(s, "sources = {}", self.sources);
        let _ = writeln!(s, "pairs = {}", self.pairs);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Constraint(m));
        for (name, v) in [("alpha", &self.alpha), ("k", &self.k), ("m", &self.m), ("spectrum_m", &self.spectrum_m), ("oscillator_m", &self.oscillator_m)] {
            if v.is_empty() {
                return bad(format!("`{name}` must not be empty"));
            }
        }
        if self.alpha.contains(&0) || self.k.contains(&0) || self.oscillator_m.contains(&0) {
            return bad("`alpha`, `k` and `oscillator_m` must be positive".into());
        }
        if self.m.contains(&0) {
            return bad("`m` must be positive (φ_{1,0} has no nodal sheets in y)".into());
        }
        if !(16..=MAX_1D_NODES).contains(&self.n) {
            return bad(format!("`n` = {} outside 16..={MAX_1D_NODES}", self.n));
        }
        for (name, g) in [("grid", &self.grid), ("grid_alt", &self.grid_alt)] {
            if g.iter().any(|&c| c < 3) {
                return bad(format!("`{name}` counts must be at least 3"));
            }
            if g.iter().product::<usize>() > MAX_GRID_NODES {
                return bad(format!("`{name}` exceeds the desk-scale budget of {MAX_GRID_NODES} nodes"));
            }
        }
        if self.eps.is_empty() {
            return bad("`eps` must not be empty".into());
        }
        let eps_ok = match self.scenario {
            ScenarioId::RiemannianLimit => self.eps.iter().all(|&e| e >= 0.0 && e.is_finite()),
            _ => self.eps.iter().all(|&e| e > 0.0 && e.is_finite()),
        };
        if !eps_ok {
            return bad("`eps` values must be positive".into());
        }
        if self.modes == 0 {
            return bad("`modes` must be positive".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("`tol` must lie in (0, 1)".into());
        }
        if self.radius.iter().chain(&self.radius_alt).any(|&r| r == 0) || self.radius.is_empty() || self.radius_alt.is_empty() {
            return bad("stencil radii must be positive".into());
        }
        if !(self.margin >= 0.0) {
            return bad("`margin` must be non-negative".into());
        }
        if self.window_nodes < 16 || self.window_nodes > 2048 {
            return bad("`window_nodes` outside 16..=2048".into());
        }
        if self.budget == 0 || self.points == 0 || self.sources == 0 || self.pairs < self.sources {
            return bad("`budget`, `points` and `sources` must be positive and `pairs` ≥ `sources`".into());
        }
        let dims = match self.scenario {
            ScenarioId::HeisenbergYau | ScenarioId::BoxCount | ScenarioId::DesingCheck => Some(3),
            ScenarioId::Density | ScenarioId::Courant | ScenarioId::RiemannianLimit => Some(2),
            _ => None,
        };
        if let Some(d) = dims {
            if self.grid.len() != d {
                return bad(format!("`grid` needs {d} counts for {}", self.scenario));
            }
        }
        if matches!(self.scenario, ScenarioId::HeisenbergYau | ScenarioId::Courant) && self.grid_alt.len() != 3 {
            return bad("`grid_alt` needs 3 counts".into());
        }
        Ok(())
    }
}

fn parse_list<T: FromStr>(v: &str, line: usize) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.push(item.parse::<T>().map_err(|e| ConfigError::Parse { line, message: format!("`{item}`: {e}") })?);
    }
    Ok(out)
}

/// Comma list of integers, or an inclusive range `a..b`.
fn parse_ints(v: &str, line: usize) -> Result<Vec<u32>, ConfigError> {
    if let Some((a, b)) = v.split_once("..") {
        let p = |s: &str| s.trim().parse::<u32>().map_err(|e| ConfigError::Parse { line, message: format!("range `{v}`: {e}") });
        let (a, b) = (p(a)?, p(b)?);
        if a > b {
            return Err(ConfigError::Parse { line, message: format!("empty range `{v}`") });
        }
        return Ok((a..=b).collect());
    }
    parse_list(v, line)
}

fn parse_one<T: FromStr>(v: &str, line: usize) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| ConfigError::Parse { line, message: format!("`{v}`: {e}") })
}

/// Parse config text. `scenario` may be omitted when `fallback` is given;
/// when both are present they must agree.
pub fn parse_config(text: &str, fallback: Option<ScenarioId>) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{body}`") });
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey { line, key: k });
        }
        if entries.iter().any(|(_, e, _)| *e == k) {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{k}`") });
        }
        entries.push((line, k, v));
    }
    let declared = match entries.iter().find(|(_, k, _)| k == "scenario") {
        Some((line, _, v)) => Some(v.parse::<ScenarioId>().map_err(|message| ConfigError::Parse { line: *line, message })?),
        None => None,
    };
    let scenario = match (declared, fallback) {
        (Some(d), Some(f)) if d != f => return Err(ConfigError::Constraint(format!("config is for `{d}`, not `{f}`"))),
        (Some(d), _) => d,
        (None, Some(f)) => f,
        (None, None) => return Err(ConfigError::Constraint("missing `scenario`".into())),
    };
    let mut c = ScenarioConfig::defaults(scenario);
    for (line, k, v) in entries {
        match k.as_str() {
            "scenario" => {}
            "alpha" => c.alpha = parse_ints(&v, line)?,
            "k" => c.k = parse_ints(&v, line)?,
            "m" => c.m = parse_ints(&v, line)?,
            "spectrum_m" => c.spectrum_m = parse_ints(&v, line)?,
            "oscillator_m" => c.oscillator_m = parse_ints(&v, line)?,
            "n" => c.n = parse_one(&v, line)?,
            "grid" => c.grid = parse_list(&v, line)?,
            "grid_alt" => c.grid_alt = parse_list(&v, line)?,
            "eps" => c.eps = parse_list(&v, line)?,
            "modes" => c.modes = parse_one(&v, line)?,
            "tol" => c.tol = parse_one(&v, line)?,
            "radius" => c.radius = parse_list(&v, line)?,
            "radius_alt" => c.radius_alt = parse_list(&v, line)?,
            "margin" => c.margin = parse_one(&v, line)?,
            "window_nodes" => c.window_nodes = parse_one(&v, line)?,
            "budget" => c.budget = parse_one(&v, line)?,
            "points" => c.points = parse_one(&v, line)?,
            "sources" => c.sources = parse_one(&v, line)?,
            "pairs" => c.pairs = parse_one(&v, line)?,
            "seed" => c.seed = parse_one(&v, line)?,
            "out" => c.out = Some(PathBuf::from(v)),
            _ => unreachable!("key list checked above"),
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    load_config_for(path, None)
}

pub fn load_config_for(path: &Path, fallback: Option<ScenarioId>) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text, fallback)
}
