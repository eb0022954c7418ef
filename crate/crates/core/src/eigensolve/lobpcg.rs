//! Locally optimal block preconditioned conjugate gradient for the lowest
//! eigenpairs of a sparse symmetric matrix, with a Jacobi preconditioner.
//!
//! The search space `[X W P]` is kept orthonormal (block Gram–Schmidt plus
//! Gram-matrix normalisation), so Rayleigh–Ritz is a standard symmetric
//! eigenproblem.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discretize::Csr;

use super::band::BandCholesky;

pub(crate) enum Preconditioner {
    Jacobi(Vec<f64>),
    ShiftedInverse(BandCholesky),
}

impl Preconditioner {
    fn jacobi(a: &Csr) -> Self {
        Preconditioner::Jacobi(a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect())
    }

    /// Banded `(A + σI)⁻¹` with `σ = 10⁻⁴ max diag`, when `n b²` fits the
    /// budget; Jacobi otherwise.
    pub fn choose(a: &Csr, allow_band: bool) -> Self {
        let b = super::band::bandwidth(a);
        if allow_band && (a.nrows as f64) * (b as f64).powi(2) <= 4e8 {
            let sigma = 1e-4 * a.diagonal().iter().fold(0.0f64, |m, &d| m.max(d)).max(f64::MIN_POSITIVE);
            if let Some(f) = BandCholesky::new(a, sigma) {
                return Preconditioner::ShiftedInverse(f);
            }
        }
        Self::jacobi(a)
    }

    fn apply(&self, x: &mut [f64]) {
        match self {
            Preconditioner::Jacobi(d) => x.iter_mut().zip(d).for_each(|(v, s)| *v *= s),
            Preconditioner::ShiftedInverse(f) => f.solve(x),
        }
    }
}

pub(crate) struct LobpcgOutcome {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn apply_block(a: &Csr, x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let cols: Vec<Vec<f64>> =
        (0..x.ncols()).into_par_iter().map(|j| a.matvec(&x.as_slice()[j * n..(j + 1) * n])).collect();
    DMatrix::from_iterator(n, x.ncols(), cols.into_iter().flatten())
}

/// Orthonormalise `v` against itself via its Gram matrix, dropping
/// directions whose Gram eigenvalue is negligible.
fn svqb(v: DMatrix<f64>) -> DMatrix<f64> {
    if v.ncols() == 0 {
        return v;
    }
    let g = v.tr_mul(&v);
    let scale = g.diagonal().max().max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::new(g);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-13 * scale).collect();
    let mut t = DMatrix::zeros(v.ncols(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / eig.eigenvalues[i].sqrt();
        t.set_column(c, &(eig.eigenvectors.column(i) * s));
    }
    v * t
}

/// Remove the span of orthonormal `q` from `v`, then orthonormalise; two
/// passes for numerical orthogonality.
fn orthonormal_complement(q: &DMatrix<f64>, mut v: DMatrix<f64>) -> DMatrix<f64> {
    for _ in 0..2 {
        let c = q.tr_mul(&v);
        v -= q * c;
        v = svqb(v);
    }
    v
}

fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

pub(crate) fn lobpcg(
    a: &Csr,
    precond: &Preconditioner,
    k: usize,
    block: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> LobpcgOutcome {
    let n = a.nrows;
    let m = block.max(k).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    let mut x = svqb(x0);
    let mut ax = apply_block(a, &x);
    let mut p: Option<DMatrix<f64>> = None;
    let mut values = vec![0.0; x.ncols()];
    let mut residuals = vec![f64::INFINITY; x.ncols()];

    // Initial Rayleigh–Ritz.
    {
        let g = x.tr_mul(&ax);
        let g = (&g + g.transpose()) * 0.5;
        let eig = sorted_eigen(g);
        x = &x * &eig.1;
        ax = &ax * &eig.1;
        values = eig.0;
    }

    for it in 0..max_iter {
        let lam = DVector::from_vec(values.clone());
        let r = &ax - &x * DMatrix::from_diagonal(&lam);
        for j in 0..r.ncols() {
            residuals[j] = r.column(j).norm();
        }
        let conv: Vec<bool> = (0..values.len()).map(|j| residuals[j] <= tol * (values[j].abs() + 1.0)).collect();
        if conv[..k].iter().all(|&c| c) {
            return LobpcgOutcome { values, vectors: x, residuals, iterations: it, converged: true };
        }
        let active: Vec<usize> = (0..values.len()).filter(|&j| !conv[j]).collect();
        let mut w = select_columns(&r, &active);
        w.as_mut_slice().par_chunks_mut(n).for_each(|col| precond.apply(col));
        let mut extra = w;
        if let Some(pp) = &p {
            let pa = select_columns(pp, &active);
            let mut joined = DMatrix::zeros(n, extra.ncols() + pa.ncols());
            joined.columns_mut(0, extra.ncols()).copy_from(&extra);
            joined.columns_mut(extra.ncols(), pa.ncols()).copy_from(&pa);
            extra = joined;
        }
        let v = orthonormal_complement(&x, extra);
        if v.ncols() == 0 {
            break;
        }
        let av = apply_block(a, &v);
        let nx = x.ncols();
        let nv = v.ncols();
        let mut s = DMatrix::zeros(n, nx + nv);
        s.columns_mut(0, nx).copy_from(&x);
        s.columns_mut(nx, nv).copy_from(&v);
        let mut as_ = DMatrix::zeros(n, nx + nv);
        as_.columns_mut(0, nx).copy_from(&ax);
        as_.columns_mut(nx, nv).copy_from(&av);
        let g = s.tr_mul(&as_);
        let g = (&g + g.transpose()) * 0.5;
        let (vals, vecs) = sorted_eigen(g);
        let c = vecs.columns(0, m).into_owned();
        x = &s * &c;
        ax = &as_ * &c;
        let cv = c.rows(nx, nv).into_owned();
        p = Some(&v * cv);
        values = vals[..m].to_vec();
    }
    let lam = DVector::from_vec(values.clone());
    let r = &ax - &x * DMatrix::from_diagonal(&lam);
    for j in 0..r.ncols() {
        residuals[j] = r.column(j).norm();
    }
    let converged = (0..k).all(|j| residuals[j] <= tol * (values[j].abs() + 1.0));
    LobpcgOutcome { values, vectors: x, residuals, iterations: max_iter, converged }
}

/// Eigen-decomposition with ascending eigenvalues.
pub(crate) fn sorted_eigen(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = select_columns(&eig.eigenvectors, &order);
    (vals, vecs)
}
