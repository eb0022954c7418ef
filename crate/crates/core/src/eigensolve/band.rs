//! Banded Cholesky factorisation, used as the shifted-inverse
//! preconditioner `(A + σI)⁻¹` when the bandwidth is small.

use crate::discretize::Csr;

pub(crate) fn bandwidth(a: &Csr) -> usize {
    a.triplets().map(|(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
}

pub(crate) struct BandCholesky {
    n: usize,
    b: usize,
    /// Row `i` holds `L[i][i-b..=i]`; entry `L[i][j]` at `i*(b+1) + b - (i - j)`.
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factor `A + σI`; `None` if a pivot is not positive.
    pub fn new(a: &Csr, sigma: f64) -> Option<Self> {
        let n = a.nrows;
        let b = bandwidth(a);
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for (r, c, v) in a.triplets() {
            if c <= r {
                l[r * w + b - (r - c)] += v;
            }
        }
        for i in 0..n {
            l[i * w + b] += sigma;
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(b);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(b));
                let mut s = l[i * w + b - (i - j)];
                for k in lo..j {
                    s -= l[i * w + b - (i - k)] * l[j * w + b - (j - k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * w + b] = s.sqrt();
                } else {
                    l[i * w + b - (i - j)] = s / l[j * w + b];
                }
            }
        }
        Some(BandCholesky { n, b, l })
    }

    pub fn solve(&self, x: &mut [f64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[i * w + b - (i - k)] * x[k];
            }
            x[i] = s / self.l[i * w + b];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + b + 1).min(n) {
                s -= self.l[k * w + b - (k - i)] * x[k];
            }
            x[i] = s / self.l[i * w + b];
        }
    }
}
