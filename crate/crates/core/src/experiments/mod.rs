//! Reproducible numerical scenarios built on the other modules. Each scenario
//! reads a [`ScenarioConfig`], produces a [`Report`] of CSV tables, metrics
//! and pass/fail verdicts, and can be written to disk with [`emit_report`].

mod config;
mod geometry;
mod report;
mod run;
mod spectra;
mod symbolic;
mod yau;

pub use config::{
    load_config, load_config_for, parse_config, ConfigError, ScenarioConfig, ScenarioId, DEFAULT_SEED, MAX_1D_NODES,
    MAX_GRID_NODES,
};
pub use geometry::*;
pub use report::{band, emit_report, kendall_tau, num, Format, Report, Table, Verdict, REPORT_SCHEMA, SCHEMA_VERSION};
pub use run::*;
pub use spectra::*;
pub use symbolic::*;
pub use yau::*;

use crate::discretize::DiscretizeError;
use crate::eigensolve::EigenError;
use crate::nodal::NodalError;
use crate::srgeom::SrError;
use crate::vf_algebra::VfError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Nodal(#[from] NodalError),
    #[error(transparent)]
    Geometry(#[from] SrError),
    #[error(transparent)]
    Symbolic(#[from] VfError),
    #[error("i/o: {0}")]
    Io(String),
    #[error("scenario {scenario}: {source}")]
    Scenario { scenario: ScenarioId, source: Box<ExperimentError> },
}
