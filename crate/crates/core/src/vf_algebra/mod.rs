//! Exact symbolic algebra of polynomial vector fields: brackets, divergence,
//! the sub-Riemannian flag, non-holonomic orders, dilations, nilpotent
//! approximation, privileged coordinates and the Grushin lift.

mod dilation;
mod field;
mod flag;
mod parse;
mod poly;
mod privileged;
mod structure;

pub use dilation::{
    dilate_field, dilate_field_symbolic, graded_components, graded_decomposition, term_degree, GradedDecomposition,
};
pub use field::{lie_bracket, EpsilonSeries, VectorField};
pub use flag::{
    bracket_levels, check_hormander, compute_flag, compute_flag_with, growth_vector, nonholonomic_order, FlagData,
    FlagOptions, HormanderEntry, HormanderReport, Order, Point, FLOAT_PIVOT_TOL,
};
pub use parse::{parse_polynomial, parse_vector_field, var_names};
pub use poly::{default_var_names, rat, rat_frac, rat_to_f64, CompiledPoly, Monomial, Polynomial, Rational};
pub use privileged::{privileged_coordinates_exp2, PrivilegedChart};
pub use structure::{desingularize_grushin, eval_const, parse_structure, project_lifted, AxisDomain, SRStructure, Shear};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VfError {
    #[error("syntax error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("`{name}` at position {position} is out of range for dimension {dimension}")]
    IndexOutOfRange { name: String, position: usize, dimension: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("divergence is not polynomial for this measure density")]
    NonPolynomialDivergence,
    #[error("weights {weights:?} are not {expected} positive integers")]
    InvalidWeights { expected: usize, weights: Vec<usize> },
    #[error("dilation by zero")]
    ZeroDilation,
    #[error("nonzero component of degree {degree} < -1: coordinates are not privileged")]
    LowerDegreeComponent { degree: i64 },
    #[error("frame not adapted: {detail}")]
    FrameNotAdapted { detail: String },
    #[error("series for field {field} does not terminate within degree {degree}")]
    FlowNotTerminating { field: usize, degree: usize },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("structure file line {line}: {message}")]
    StructureFile { line: usize, message: String },
}

/// `div_μ X = (1/ρ) Σ_j ∂_j(ρ X_j)` for the structure's density `ρ`.
pub fn divergence(x: &VectorField, s: &SRStructure) -> Result<Polynomial, VfError> {
    if x.dim() != s.dim() {
        return Err(VfError::DimensionMismatch { left: x.dim(), right: s.dim() });
    }
    let rho = s.density();
    let mut num = Polynomial::zero(s.dim());
    for (j, a) in x.components().iter().enumerate() {
        num = &num + &(rho * a).derivative(j);
    }
    num.div_exact(rho).ok_or(VfError::NonPolynomialDivergence)
}
