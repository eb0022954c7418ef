use std::collections::BTreeMap;

use num::Zero;

use super::field::{EpsilonSeries, VectorField};
use super::poly::{Polynomial, Rational};
use super::VfError;

fn check_weights(dim: usize, weights: &[usize]) -> Result<(), VfError> {
    if weights.len() != dim || weights.contains(&0) {
        return Err(VfError::InvalidWeights { expected: dim, weights: weights.to_vec() });
    }
    Ok(())
}

/// Weighted degree of `x^α ∂_j`: `⟨w, α⟩ − w_j`.
pub fn term_degree(exps: &[u32], j: usize, weights: &[usize]) -> i64 {
    exps.iter().zip(weights).map(|(&a, &w)| a as i64 * w as i64).sum::<i64>() - weights[j] as i64
}

/// Split a field into `δ_ε`-homogeneous pieces without checking privilege.
pub fn graded_components(x: &VectorField, weights: &[usize]) -> Result<BTreeMap<i64, VectorField>, VfError> {
    check_weights(x.dim(), weights)?;
    let n = x.dim();
    let mut out: BTreeMap<i64, Vec<Polynomial>> = BTreeMap::new();
    for (j, p) in x.components().iter().enumerate() {
        for (e, c) in p.terms() {
            let k = term_degree(e, j, weights);
            let comps = out.entry(k).or_insert_with(|| vec![Polynomial::zero(n); n]);
            comps[j] = &comps[j] + &Polynomial::monomial(n, e.clone(), c.clone());
        }
    }
    Ok(out.into_iter().map(|(k, c)| (k, VectorField::new(c).expect("components share a dimension"))).collect())
}

/// Pullback `δ_ε^* X` as a series in `ε`: each monomial `x^α ∂_j` picks up
/// `ε^{⟨w,α⟩ − w_j}`.
pub fn dilate_field_symbolic(x: &VectorField, weights: &[usize]) -> Result<EpsilonSeries, VfError> {
    Ok(EpsilonSeries { terms: graded_components(x, weights)? })
}

/// Pullback `δ_ε^* X` for a nonzero rational `ε`.
pub fn dilate_field(x: &VectorField, weights: &[usize], eps: &Rational) -> Result<VectorField, VfError> {
    if eps.is_zero() {
        return Err(VfError::ZeroDilation);
    }
    Ok(dilate_field_symbolic(x, weights)?.at(eps, x.dim()))
}

/// Decomposition of a field into homogeneous components of degree `k ≥ −1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDecomposition {
    pub weights: Vec<usize>,
    pub dim: usize,
    pub components: BTreeMap<i64, VectorField>,
}

impl GradedDecomposition {
    /// The degree −1 component `X̂` (zero when absent).
    pub fn nilpotent_part(&self) -> VectorField {
        self.components.get(&-1).cloned().unwrap_or_else(|| VectorField::zero(self.dim))
    }

    /// Sum of the degree `≥ 0` components.
    pub fn remainder(&self) -> VectorField {
        self.components
            .range(0..)
            .fold(VectorField::zero(self.dim), |acc, (_, v)| &acc + v)
    }

    pub fn reconstruct(&self) -> VectorField {
        self.components.values().fold(VectorField::zero(self.dim), |acc, v| &acc + v)
    }
}

/// Graded decomposition in privileged coordinates. A nonzero component of
/// degree below −1 means the coordinates are not privileged for this field.
pub fn graded_decomposition(x: &VectorField, weights: &[usize]) -> Result<GradedDecomposition, VfError> {
    let components = graded_components(x, weights)?;
    if let Some((&k, _)) = components.iter().find(|(&k, v)| k < -1 && !v.is_zero()) {
        return Err(VfError::LowerDegreeComponent { degree: k });
    }
    Ok(GradedDecomposition { weights: weights.to_vec(), dim: x.dim(), components })
}
