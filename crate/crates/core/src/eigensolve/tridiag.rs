//! Symmetric tridiagonal eigenproblems: Sturm-count bisection for values,
//! inverse iteration for vectors.

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let scale = gershgorin(d, e).1.abs().max(1.0);
    let tiny = f64::EPSILON * scale * 1e-3;
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + e.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// Eigenvalue `j` (0-based, ascending) by bisection.
pub fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], j: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(d, e);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest `k` eigenvalues, ascending.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64], k: usize) -> Vec<f64> {
    assert_eq!(e.len() + 1, d.len().max(1));
    (0..k.min(d.len())).map(|j| tridiagonal_eigenvalue(d, e, j)).collect()
}

/// LU with partial pivoting of `T − σI`, laid out as in LAPACK `gttrf`.
struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TriLu {
    fn new(d: &[f64], e: &[f64], sigma: f64) -> Self {
        let n = d.len();
        let mut dl = e.to_vec();
        let mut dd: Vec<f64> = d.iter().map(|v| v - sigma).collect();
        let mut du = e.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] != 0.0 {
                    let f = dl[i] / dd[i];
                    dl[i] = f;
                    dd[i + 1] -= f * du[i];
                }
            } else {
                let f = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = t - f * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                swap[i] = true;
            }
        }
        let scale = dd.iter().chain(&du).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for v in &mut dd {
            if v.abs() < f64::EPSILON * scale {
                *v = f64::EPSILON * scale;
            }
        }
        TriLu { dl, d: dd, du, du2, swap }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Unit eigenvector for `lambda` by inverse iteration, orthogonalised
/// against `previous` (vectors of nearby eigenvalues).
pub fn tridiagonal_eigenvector(d: &[f64], e: &[f64], lambda: f64, previous: &[&[f64]]) -> Vec<f64> {
    let n = d.len();
    let lu = TriLu::new(d, e, lambda);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 97) as f64 / 97.0).collect();
    for _ in 0..4 {
        for p in previous {
            let c: f64 = v.iter().zip(*p).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(*p).for_each(|(a, b)| *a -= c * b);
        }
        normalize(&mut v);
        lu.solve(&mut v);
        normalize(&mut v);
    }
    for p in previous {
        let c: f64 = v.iter().zip(*p).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(*p).for_each(|(a, b)| *a -= c * b);
    }
    normalize(&mut v);
    v
}

/// Lowest `k` eigenpairs of the symmetric tridiagonal matrix `(d, e)`.
pub fn tridiagonal_eigenpairs(d: &[f64], e: &[f64], k: usize) -> Vec<(f64, Vec<f64>)> {
    let values = tridiagonal_eigenvalues(d, e, k);
    let scale = gershgorin(d, e).1.abs().max(1.0);
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(values.len());
    for &lam in &values {
        let near: Vec<&[f64]> =
            out.iter().filter(|(mu, _)| (lam - mu).abs() < 1e-8 * scale).map(|(_, v)| v.as_slice()).collect();
        let v = tridiagonal_eigenvector(d, e, lam, &near);
        out.push((lam, v));
    }
    out
}
