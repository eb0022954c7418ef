//! Carnot–Carathéodory geometry on grids.
//!
//! Distances are shortest paths on a stencil graph whose edges are the
//! horizontal displacements at their midpoints, weighted by the control
//! metric. On top of the distance maps sit the ball-box sandwich, greedy
//! box counting, the nodal-density statistic and a horizontal-perimeter
//! proxy for nodal sets.

mod ballbox;
mod boxcount;
mod density;
mod graph;
mod metric;

pub use ballbox::*;
pub use boxcount::*;
pub use density::*;
pub use graph::*;
pub use metric::{control_metric_cost, control_metric_cost_with, ControlMetric, DEFAULT_ETA};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SrError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid stencil: {0}")]
    InvalidStencil(String),
    #[error("empty source set")]
    EmptySources,
    #[error("{count} nodes unreachable from the sources; the stencil graph is disconnected")]
    Unreachable { count: usize },
    #[error("the decomposition has no nodal cells")]
    EmptyNodalSet,
    #[error("covering budget exhausted after {} centres", .0.radii.len())]
    BudgetExceeded(Box<BoxCount>),
    #[error("radii must be positive: {0:?}")]
    InvalidEps(Vec<f64>),
}
