use std::io;

use nalgebra::DMatrix;
use rayon::prelude::*;

/// Compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

/// Rows below this size are multiplied serially.
const PAR_ROWS: usize = 4096;

impl Csr {
    /// Sum duplicates in insertion order, so equal inputs give bit-equal output.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col = Vec::with_capacity(trip.len());
        let mut val: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr { nrows, ncols, row_ptr, col, val }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.row_ptr[r];
        let e = self.row_ptr[r + 1];
        self.col[s..e].iter().copied().zip(self.val[s..e].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let s = self.row_ptr[r];
        let e = self.row_ptr[r + 1];
        match self.col[s..e].binary_search(&c) {
            Ok(k) => self.val[s + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`; each row is summed serially, so the result is independent
    /// of the thread count.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row = |r: usize| {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            s
        };
        if self.nrows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row(r));
        } else {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = row(r);
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// `self + s·other` with the union sparsity pattern.
    pub fn add_scaled(&self, other: &Csr, s: f64) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut trip: Vec<(usize, usize, f64)> = self.triplets().collect();
        trip.extend(other.triplets().map(|(r, c, v)| (r, c, s * v)));
        Csr::from_triplets(self.nrows, self.ncols, trip)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMeta {
    pub structure_id: String,
    pub grid_id: String,
    pub scheme: String,
}

/// Discrete symmetric PSD operator over the grid unknowns, with the diagonal
/// mass (measure density) of the unknowns. The eigenproblem is `A v = λ M v`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetricOperator {
    pub matrix: Csr,
    pub mass: Vec<f64>,
    pub meta: OperatorMeta,
}

impl SparseSymmetricOperator {
    pub fn new(matrix: Csr, mass: Vec<f64>, meta: OperatorMeta) -> Self {
        assert_eq!(matrix.nrows, matrix.ncols, "operator must be square");
        assert_eq!(mass.len(), matrix.nrows);
        SparseSymmetricOperator { matrix, mass, meta }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn unit_mass(&self) -> bool {
        self.mass.iter().all(|&m| m == 1.0)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `max |a_ij − a_ji| / max |a_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.matrix.val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.matrix
            .triplets()
            .map(|(r, c, v)| (v - self.matrix.get(c, r)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Diagonal and first off-diagonal when the matrix is tridiagonal.
    pub fn as_tridiagonal(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        if self.matrix.triplets().any(|(r, c, _)| r.abs_diff(c) > 1) {
            return None;
        }
        let d = self.matrix.diagonal();
        let e = (0..n.saturating_sub(1)).map(|i| self.matrix.get(i, i + 1)).collect();
        Some((d, e))
    }

    /// Header (dimension, nnz, structure id), then `row col value` lines.
    pub fn write_dump(&self, w: &mut impl io::Write) -> io::Result<()> {
        writeln!(w, "# dimension {} nnz {} structure {} grid {} scheme {}", self.dim(), self.nnz(), self.meta.structure_id, self.meta.grid_id, self.meta.scheme)?;
        for (r, c, v) in self.matrix.triplets() {
            writeln!(w, "{r} {c} {v:?}")?;
        }
        Ok(())
    }
}
