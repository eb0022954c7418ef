//! Lowest eigenpairs of discrete sub-Laplacians, Rayleigh quotients and
//! multiplicity clustering.
//!
//! [`smallest_eigenpairs`] picks a dense solver for small operators, a
//! Sturm-bisection solver for tridiagonal ones and LOBPCG otherwise. LOBPCG
//! is preconditioned by a banded factorisation of `A + σI` when the
//! bandwidth is small and by the diagonal otherwise. Two
//! symmetry reductions cut the cost on translation-invariant operators:
//! [`AxisSector`] (functions constant along a periodic axis) and
//! [`fourier_spectrum`] (Fourier blocks along all periodic axes).

mod band;
mod lobpcg;
mod reduce;
mod tridiag;

use std::io;

use nalgebra::DMatrix;

use crate::discretize::{Csr, DifferenceOperator, SparseSymmetricOperator};

pub use reduce::{axis_constant_sector, fourier_spectrum, AxisSector, FourierLabel};
pub use tridiag::{sturm_count, tridiagonal_eigenpairs, tridiagonal_eigenvalue, tridiagonal_eigenvalues, tridiagonal_eigenvector};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EigenError {
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    InvalidCount { k: usize, dim: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {iterations} iterations; best residuals {residuals:?}")]
    NotConverged { iterations: usize, residuals: Vec<f64> },
    #[error("Rayleigh quotient of the zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not invariant under the requested reduction: {0}")]
    NotInvariant(String),
}

/// `A v = λ M v` with `vᵀ M v = 1`; for unit mass `v` is a unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖A v − λ M v‖₂`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub seed: u64,
    pub max_iter: usize,
    /// Operators up to this size are solved densely.
    pub dense_threshold: usize,
    /// Extra LOBPCG block columns beyond `k`; `None` picks `max(4, k/2)`.
    pub guard: Option<usize>,
    /// Use the banded shifted-inverse preconditioner when affordable;
    /// `false` forces Jacobi.
    pub band_preconditioner: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { seed: 0x5EED, max_iter: 5000, dense_threshold: 400, guard: None, band_preconditioner: true }
    }
}

pub fn smallest_eigenpairs(a: &SparseSymmetricOperator, k: usize, tol: f64) -> Result<Vec<EigenPair>, EigenError> {
    smallest_eigenpairs_with(a, k, tol, &SolverOptions::default())
}

pub fn smallest_eigenpairs_with(
    a: &SparseSymmetricOperator,
    k: usize,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Vec<EigenPair>, EigenError> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(EigenError::InvalidCount { k, dim: n });
    }
    if !(tol > 0.0) {
        return Err(EigenError::InvalidTolerance(tol));
    }
    // Symmetric scaling B = M^{-1/2} A M^{-1/2}.
    let unit = a.unit_mass();
    let inv_sqrt: Vec<f64> = a.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let scaled;
    let b: &Csr = if unit {
        &a.matrix
    } else {
        scaled = Csr::from_triplets(
            n,
            n,
            a.matrix.triplets().map(|(r, c, v)| (r, c, v * inv_sqrt[r] * inv_sqrt[c])).collect(),
        );
        &scaled
    };

    let guard = opts.guard.unwrap_or((k / 2).max(4));
    let block = (k + guard).min(n);
    let raw: Vec<(f64, Vec<f64>)> = if let (Some((d, e)), true) = (a.as_tridiagonal().filter(|_| unit), n > opts.dense_threshold) {
        tridiagonal_eigenpairs(&d, &e, k)
    } else if n <= opts.dense_threshold || 3 * block >= n {
        dense_lowest(&b.to_dense(), k)
    } else {
        let pre = lobpcg::Preconditioner::choose(b, opts.band_preconditioner);
        let out = lobpcg::lobpcg(b, &pre, k, block, tol, opts.max_iter, opts.seed);
        if !out.converged {
            return Err(EigenError::NotConverged { iterations: out.iterations, residuals: out.residuals[..k].to_vec() });
        }
        (0..k).map(|j| (out.values[j], out.vectors.column(j).iter().copied().collect())).collect()
    };

    let mut pairs = Vec::with_capacity(k);
    for (value, w) in raw {
        let mut v: Vec<f64> = if unit { w } else { w.iter().zip(&inv_sqrt).map(|(x, s)| x * s).collect() };
        normalize_sign(&mut v);
        let mut pair = EigenPair { value, vector: v, residual: 0.0 };
        pair.residual = residual_norm(a, &pair)?;
        pairs.push(pair);
    }
    Ok(pairs)
}

fn dense_lowest(m: &DMatrix<f64>, k: usize) -> Vec<(f64, Vec<f64>)> {
    let sym = (m + m.transpose()) * 0.5;
    let (vals, vecs) = lobpcg::sorted_eigen(sym);
    (0..k).map(|j| (vals[j], vecs.column(j).iter().copied().collect())).collect()
}

/// Flip `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `‖A v − λ M v‖₂`.
pub fn residual_norm(a: &SparseSymmetricOperator, pair: &EigenPair) -> Result<f64, EigenError> {
    if pair.vector.len() != a.dim() {
        return Err(EigenError::DimensionMismatch { expected: a.dim(), got: pair.vector.len() });
    }
    let av = a.apply(&pair.vector);
    Ok(av
        .iter()
        .zip(&pair.vector)
        .zip(&a.mass)
        .map(|((y, x), m)| (y - pair.value * m * x).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `Σ_i ½ Σ_± ‖D_i^± v‖²_W / ‖v‖²_M`, with `W` the node weights and `M` the
/// unknown mass. Equals `vᵀAv / vᵀMv` for the operator assembled from the
/// same differences.
pub fn rayleigh_quotient(
    ops: &[DifferenceOperator],
    node_weights: &[f64],
    mass: &[f64],
    v: &[f64],
) -> Result<f64, EigenError> {
    if v.len() != mass.len() {
        return Err(EigenError::DimensionMismatch { expected: mass.len(), got: v.len() });
    }
    let denom: f64 = v.iter().zip(mass).map(|(x, m)| m * x * x).sum();
    if denom == 0.0 {
        return Err(EigenError::ZeroVector);
    }
    let mut num = 0.0;
    for op in ops {
        for d in op.sides() {
            if d.ncols != v.len() || d.nrows != node_weights.len() {
                return Err(EigenError::DimensionMismatch { expected: d.ncols, got: v.len() });
            }
            num += 0.5 * d.matvec(v).iter().zip(node_weights).map(|(y, w)| w * y * y).sum::<f64>();
        }
    }
    Ok(num / denom)
}

/// Two eigenvalues belong to one cluster when `|Δλ| < 1e-6 (λ + 1)`.
pub const CLUSTER_REL_GAP: f64 = 1e-6;

/// A run of numerically equal eigenvalues in a sorted spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// 0-based index of the first member.
    pub first: usize,
    pub mult: usize,
    /// Distance to the next cluster (`∞` for the last computed one).
    pub gap_above: f64,
}

pub fn same_cluster(a: f64, b: f64) -> bool {
    (b - a).abs() < CLUSTER_REL_GAP * (a.abs().min(b.abs()) + 1.0)
}

/// Chain consecutive sorted values into clusters.
pub fn clusters(values: &[f64]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if same_cluster(values[i - 1], v) => c.mult += 1,
            _ => {
                if let Some(c) = out.last_mut() {
                    c.gap_above = v - values[i - 1];
                }
                out.push(Cluster { first: i, mult: 1, gap_above: f64::INFINITY });
            }
        }
    }
    out
}

/// Per mode: the cluster containing it.
pub fn mode_clusters(values: &[f64]) -> Vec<Cluster> {
    let mut per = Vec::with_capacity(values.len());
    for c in clusters(values) {
        for _ in 0..c.mult {
            per.push(c.clone());
        }
    }
    per
}

/// Header (value, residual), then one vector entry per line in unknown order.
pub fn write_eigenpair(pair: &EigenPair, w: &mut impl io::Write) -> io::Result<()> {
    writeln!(w, "# value {:?} residual {:?}", pair.value, pair.residual)?;
    for x in &pair.vector {
        writeln!(w, "{x:?}")?;
    }
    Ok(())
}
