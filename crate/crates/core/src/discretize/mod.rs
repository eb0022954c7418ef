//! Tensor grids over product domains and finite-difference sub-Laplacians.
//!
//! Each field `X = Σ a_j ∂_j` becomes a pair of one-sided difference
//! operators with coefficients at staggered midpoints. The operator is
//! `½ Σ_i Σ_± (D_i^±)ᵀ M D_i^±`, symmetric and PSD by construction.

mod assemble;
mod grid;
mod operator;

pub use assemble::{
    assemble_from_differences, assemble_riemannian_blend, assemble_schrodinger_1d, assemble_sublaplacian,
    difference_operators, node_weights, schrodinger_grid, DifferenceOperator, Potential,
};
pub use grid::{build_grid, Axis, Boundary, Grid};
pub use operator::{Csr, OperatorMeta, SparseSymmetricOperator};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DiscretizeError {
    #[error("axis {axis}: node count {count} is too small")]
    InvalidCount { axis: usize, count: usize },
    #[error("axis {axis} is twisted-periodic; twisted identifications are not supported by the grid builder")]
    UnsupportedTwist { axis: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field {field} has divergence {divergence}; a zeroth-order measure correction would be needed (not implemented)")]
    NonzeroDivergence { field: usize, divergence: String },
    #[error("measure density is not positive at node {node}")]
    NonPositiveDensity { node: usize },
}
