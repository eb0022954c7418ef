//! Exact symmetry reductions of translation-invariant operators.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discretize::{Boundary, Csr, Grid, OperatorMeta, SparseSymmetricOperator};

use super::{normalize_sign, residual_norm, tridiagonal_eigenvalues, tridiagonal_eigenvector, EigenError, EigenPair};

fn unknown_counts(g: &Grid) -> Vec<usize> {
    g.axes().iter().map(|a| a.unknown_count()).collect()
}

fn split(mut u: usize, counts: &[usize]) -> Vec<usize> {
    let mut m = vec![0; counts.len()];
    for a in (0..counts.len()).rev() {
        m[a] = u % counts[a];
        u /= counts[a];
    }
    m
}

fn join(m: &[usize], counts: &[usize]) -> usize {
    m.iter().zip(counts).fold(0, |acc, (&i, &c)| acc * c + i)
}

/// Grid functions constant along one periodic axis. When the operator
/// commutes with translations along that axis the subspace is invariant and
/// its eigenpairs are eigenpairs of the full operator.
#[derive(Clone, Debug)]
pub struct AxisSector {
    pub axis: usize,
    /// Operator on the remaining axes, unknowns in row-major order.
    pub reduced: SparseSymmetricOperator,
    counts: Vec<usize>,
}

impl AxisSector {
    fn fiber(&self, u: usize) -> usize {
        let mut m = split(u, &self.counts);
        m.remove(self.axis);
        let mut rc = self.counts.clone();
        rc.remove(self.axis);
        join(&m, &rc)
    }

    /// Extend a reduced vector constantly along the axis, preserving its norm.
    pub fn lift(&self, v: &[f64]) -> Vec<f64> {
        let c = self.counts[self.axis] as f64;
        let n: usize = self.counts.iter().product();
        (0..n).map(|u| v[self.fiber(u)] / c.sqrt()).collect()
    }

    /// Lift a pair and recompute its residual against the full operator.
    pub fn lift_pair(&self, full: &SparseSymmetricOperator, p: &EigenPair) -> Result<EigenPair, EigenError> {
        let mut out = EigenPair { value: p.value, vector: self.lift(&p.vector), residual: 0.0 };
        out.residual = residual_norm(full, &out)?;
        Ok(out)
    }
}

/// Restrict `op` to functions constant along periodic `axis`.
///
/// Invariance is verified on a random probe: `A P x` must be constant on
/// every fibre.
pub fn axis_constant_sector(op: &SparseSymmetricOperator, g: &Grid, axis: usize) -> Result<AxisSector, EigenError> {
    if op.dim() != g.n_unknowns() {
        return Err(EigenError::DimensionMismatch { expected: g.n_unknowns(), got: op.dim() });
    }
    if axis >= g.dim() || g.axis(axis).boundary != Boundary::Periodic {
        return Err(EigenError::NotInvariant(format!("axis {axis} is not periodic")));
    }
    let counts = unknown_counts(g);
    let c = counts[axis];
    let nr = op.dim() / c;
    let mut sector = AxisSector {
        axis,
        reduced: SparseSymmetricOperator::new(Csr::from_triplets(nr, nr, vec![]), vec![1.0; nr], op.meta.clone()),
        counts,
    };
    let fib: Vec<usize> = (0..op.dim()).map(|u| sector.fiber(u)).collect();

    let mut mass = vec![f64::NAN; nr];
    for (u, &m) in op.mass.iter().enumerate() {
        let f = fib[u];
        if mass[f].is_nan() {
            mass[f] = m;
        } else if mass[f] != m {
            return Err(EigenError::NotInvariant("mass varies along the axis".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let probe: Vec<f64> = (0..nr).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = op.apply(&sector.lift(&probe));
    let mut first = vec![f64::NAN; nr];
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for (u, &v) in y.iter().enumerate() {
        let f = fib[u];
        if first[f].is_nan() {
            first[f] = v;
        } else if (first[f] - v).abs() > 1e-10 * scale {
            return Err(EigenError::NotInvariant(format!("operator does not commute with translations along axis {axis}")));
        }
    }

    let trip = op.matrix.triplets().map(|(r, col, v)| (fib[r], fib[col], v / c as f64)).collect();
    let meta = OperatorMeta { scheme: format!("{} | axis-{axis}-constant", op.meta.scheme), ..op.meta.clone() };
    sector.reduced = SparseSymmetricOperator::new(Csr::from_triplets(nr, nr, trip), mass, meta);
    Ok(sector)
}

/// Where a Fourier-block eigenpair comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierLabel {
    /// Wave numbers along the periodic axes.
    pub wave: Vec<usize>,
    /// Index of the eigenvalue within its block.
    pub level: usize,
    /// `false`: `φ(x) cos(θ·r)`; `true`: `φ(x) sin(θ·r)`.
    pub sine: bool,
}

/// Lowest `k` eigenpairs of an operator on a grid whose axis 0 is arbitrary
/// and whose other axes are periodic, when the operator commutes with all
/// periodic translations and couples axis-0 neighbours only along fixed
/// `(y, z, …)`. Each wave vector `θ` gives a real symmetric tridiagonal block
/// in axis 0; eigenvectors are `φ(x) cos(θ·r)` and `φ(x) sin(θ·r)`.
pub fn fourier_spectrum(
    op: &SparseSymmetricOperator,
    g: &Grid,
    k: usize,
) -> Result<Vec<(EigenPair, FourierLabel)>, EigenError> {
    let n = op.dim();
    if n != g.n_unknowns() {
        return Err(EigenError::DimensionMismatch { expected: g.n_unknowns(), got: n });
    }
    if k == 0 || k > n {
        return Err(EigenError::InvalidCount { k, dim: n });
    }
    if !op.unit_mass() {
        return Err(EigenError::NotInvariant("Fourier blocks require unit mass".into()));
    }
    if g.axes()[1..].iter().any(|a| a.boundary != Boundary::Periodic) {
        return Err(EigenError::NotInvariant("axes beyond the first must be periodic".into()));
    }
    let counts = unknown_counts(g);
    let n0 = counts[0];
    let per: Vec<usize> = counts[1..].to_vec();
    let np: usize = per.iter().product();

    // Base rows (i, 0): same-fibre offsets and the axis-0 coupling.
    let mut base: Vec<HashMap<(usize, Vec<usize>), f64>> = vec![HashMap::new(); n0];
    for i in 0..n0 {
        let mut m0 = vec![0; counts.len()];
        m0[0] = i;
        for (c, v) in op.matrix.row(join(&m0, &counts)) {
            let mc = split(c, &counts);
            base[i].insert((mc[0], mc[1..].to_vec()), v);
        }
    }
    let scale = op.matrix.val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for r in 0..n {
        let mr = split(r, &counts);
        let row: Vec<(usize, f64)> = op.matrix.row(r).collect();
        if row.len() != base[mr[0]].len() {
            return Err(EigenError::NotInvariant(format!("row {r} has a different stencil")));
        }
        for (c, v) in row {
            let mc = split(c, &counts);
            let off: Vec<usize> = (0..per.len()).map(|a| (mc[a + 1] + per[a] - mr[a + 1]) % per[a]).collect();
            if mc[0] != mr[0] && (mc[0].abs_diff(mr[0]) != 1 || off.iter().any(|&o| o != 0)) {
                return Err(EigenError::NotInvariant(format!("entry ({r}, {c}) couples axis 0 across fibres")));
            }
            match base[mr[0]].get(&(mc[0], off)) {
                Some(&b) if (b - v).abs() <= 1e-12 * scale => {}
                _ => return Err(EigenError::NotInvariant(format!("entry ({r}, {c}) breaks translation invariance"))),
            }
        }
    }
    let offdiag: Vec<f64> = (0..n0.saturating_sub(1)).map(|i| base[i].get(&(i + 1, vec![0; per.len()])).copied().unwrap_or(0.0)).collect();
    let symbols: Vec<Vec<(Vec<usize>, f64)>> = base
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().filter(|((i2, _), _)| *i2 == i).map(|((_, off), &v)| (off.clone(), v)).collect())
        .collect();

    let phase = |wave: &[usize], r: &[usize]| -> f64 {
        (0..per.len()).map(|a| 2.0 * std::f64::consts::PI * (wave[a] * r[a] % per[a]) as f64 / per[a] as f64).sum()
    };
    let neg = |w: &[usize]| -> Vec<usize> { w.iter().zip(&per).map(|(&x, &p)| (p - x) % p).collect() };
    let block_diag = |wave: &[usize]| -> Vec<f64> {
        symbols.iter().map(|sym| sym.iter().map(|(off, v)| v * phase(wave, off).cos()).sum()).collect()
    };

    // Canonical wave vectors: one of each ±θ pair.
    let waves: Vec<Vec<usize>> = (0..np).map(|w| split(w, &per)).filter(|w| *w <= neg(w)).collect();
    let per_block = k.min(n0);
    let block_values: Vec<Vec<f64>> =
        waves.par_iter().map(|w| tridiagonal_eigenvalues(&block_diag(w), &offdiag, per_block)).collect();

    let mut cands: Vec<(f64, usize, usize, bool)> = Vec::new();
    for (b, vals) in block_values.iter().enumerate() {
        let self_conj = waves[b] == neg(&waves[b]);
        for (l, &v) in vals.iter().enumerate() {
            cands.push((v, b, l, false));
            if !self_conj {
                cands.push((v, b, l, true));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2, a.3).cmp(&(b.1, b.2, b.3))));
    cands.truncate(k);

    cands
        .par_iter()
        .map(|&(value, b, level, sine)| {
            let d = block_diag(&waves[b]);
            let mut prev: Vec<Vec<f64>> = Vec::new();
            for l in 0..=level {
                let lam = block_values[b][l];
                let near: Vec<&[f64]> = (0..l)
                    .filter(|&j| (block_values[b][j] - lam).abs() < 1e-8 * (lam.abs() + 1.0))
                    .map(|j| prev[j].as_slice())
                    .collect();
                let v = tridiagonal_eigenvector(&d, &offdiag, lam, &near);
                prev.push(v);
            }
            let phi = &prev[level];
            let mut vector: Vec<f64> = (0..n)
                .map(|u| {
                    let m = split(u, &counts);
                    let t = phase(&waves[b], &m[1..]);
                    phi[m[0]] * if sine { t.sin() } else { t.cos() }
                })
                .collect();
            let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            vector.iter_mut().for_each(|x| *x /= norm);
            normalize_sign(&mut vector);
            let mut pair = EigenPair { value, vector, residual: 0.0 };
            pair.residual = residual_norm(op, &pair)?;
            Ok((pair, FourierLabel { wave: waves[b].clone(), level, sine }))
        })
        .collect()
}
