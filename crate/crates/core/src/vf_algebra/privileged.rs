use num::{One, Zero};

use super::field::VectorField;
use super::flag::{bracket_levels, growth_vector, Point, Span};
use super::poly::{Polynomial, Rational};
use super::structure::SRStructure;
use super::VfError;

/// Exponential coordinates of the second kind around a point.
#[derive(Clone, Debug)]
pub struct PrivilegedChart {
    pub q: Vec<Rational>,
    pub weights: Vec<usize>,
    pub frame: Vec<VectorField>,
    /// `Φ(x) = exp(x_1 Z_1)⋯exp(x_N Z_N)(q)`, polynomial in chart coordinates.
    pub forward: Vec<Polynomial>,
    /// `Φ^{-1}`, polynomial in ambient coordinates.
    pub inverse: Vec<Polynomial>,
}

impl PrivilegedChart {
    /// `(Φ^{-1})_* V`, expressed in chart coordinates.
    pub fn push_forward(&self, v: &VectorField) -> VectorField {
        let comps = self.inverse.iter().map(|psi| v.apply(psi).compose(&self.forward)).collect();
        VectorField::new(comps).expect("chart preserves dimension")
    }

    /// The structure fields written in the chart, with no numerical domain.
    pub fn pushed_structure(&self, s: &SRStructure) -> SRStructure {
        let fields = s.fields().iter().map(|f| self.push_forward(f)).collect();
        SRStructure::local(format!("{}@chart", s.name), fields).expect("pushed fields share a dimension")
    }
}

/// `exp(t Z)(p)` as a Lie series `Σ_k t^k/k! (Z^k x_j)(p)`, truncated at `max_deg`.
fn flow_series(z: &VectorField, max_deg: usize, field_index: usize) -> Result<Vec<Vec<Polynomial>>, VfError> {
    let n = z.dim();
    let mut per_coord = Vec::with_capacity(n);
    for j in 0..n {
        let mut terms = vec![Polynomial::var(n, j)];
        let mut cur = Polynomial::var(n, j);
        loop {
            cur = z.apply(&cur);
            if cur.is_zero() {
                break;
            }
            if terms.len() > max_deg {
                return Err(VfError::FlowNotTerminating { field: field_index, degree: max_deg });
            }
            terms.push(cur.clone());
        }
        per_coord.push(terms);
    }
    Ok(per_coord)
}

/// Privileged coordinates at `q` from an adapted frame.
///
/// `truncation` bounds the Lie-series degree of each flow; `None` uses the
/// flag step plus two.
pub fn privileged_coordinates_exp2(
    s: &SRStructure,
    q: &[Rational],
    frame: &[VectorField],
    truncation: Option<usize>,
) -> Result<PrivilegedChart, VfError> {
    let n = s.dim();
    if frame.len() != n || frame.iter().any(|z| z.dim() != n) || q.len() != n {
        return Err(VfError::FrameNotAdapted { detail: format!("expected {n} frame fields and a point in R^{n}") });
    }
    let point = Point::Exact(q.to_vec());
    let growth = growth_vector(s, &point, 2 * n + 2);
    if growth.last() != Some(&n) {
        return Err(VfError::FrameNotAdapted { detail: "flag does not reach full rank at q".into() });
    }
    let mut weights = Vec::new();
    let mut prev = 0;
    for (j, &nj) in growth.iter().enumerate() {
        weights.extend(std::iter::repeat_n(j + 1, nj - prev));
        prev = nj;
    }
    let step = growth.len();

    // Z_i(q) ∈ D^{w_i}_q and the frame has full rank
    let levels = bracket_levels(s.fields(), step);
    for (i, z) in frame.iter().enumerate() {
        let mut span = Span::for_point(&point);
        for level in &levels[..weights[i]] {
            for v in level {
                span.insert_field(v, &point);
            }
        }
        if !span.contains_field(z, &point) {
            return Err(VfError::FrameNotAdapted { detail: format!("Z_{} (q) is not in D^{}", i + 1, weights[i]) });
        }
    }
    let mut rank = Span::for_point(&point);
    for z in frame {
        rank.insert_field(z, &point);
    }
    if rank.rank() != n {
        return Err(VfError::FrameNotAdapted { detail: "frame is not a basis at q".into() });
    }

    let max_deg = truncation.unwrap_or(step + 2);
    // Φ(x): innermost flow exp(x_N Z_N) is applied to q first
    let mut p: Vec<Polynomial> = q.iter().map(|c| Polynomial::constant(n, c.clone())).collect();
    for i in (0..n).rev() {
        let series = flow_series(&frame[i], max_deg, i)?;
        let t = Polynomial::var(n, i);
        let mut next = Vec::with_capacity(n);
        for terms in &series {
            let mut acc = Polynomial::zero(n);
            let mut tk = Polynomial::one(n);
            let mut fact = Rational::one();
            for (k, term) in terms.iter().enumerate() {
                if k > 0 {
                    tk = &tk * &t;
                    fact *= Rational::from_integer((k as i64).into());
                }
                let val = term.compose(&p);
                acc = &acc + &(&tk * &val).scale(&fact.recip());
            }
            next.push(acc);
        }
        p = next;
    }
    let forward = p;
    let inverse = invert_polynomial_map(&forward, q, max_deg)?;
    Ok(PrivilegedChart { q: q.to_vec(), weights, frame: frame.to_vec(), forward, inverse })
}

/// Exact inverse of a polynomial map with invertible linear part, by the
/// fixed-point iteration `x = L^{-1}(p − q − H(x))`.
fn invert_polynomial_map(phi: &[Polynomial], q: &[Rational], max_deg: usize) -> Result<Vec<Polynomial>, VfError> {
    let n = phi.len();
    let mut lin = vec![vec![Rational::zero(); n]; n];
    let mut nonlinear = Vec::with_capacity(n);
    for (j, pj) in phi.iter().enumerate() {
        let mut h = Polynomial::zero(n);
        for (e, c) in pj.terms() {
            let deg: u32 = e.iter().sum();
            if deg == 1 {
                let i = e.iter().position(|&k| k == 1).unwrap();
                lin[j][i] = c.clone();
            } else if deg > 1 {
                h = &h + &Polynomial::monomial(n, e.clone(), c.clone());
            }
        }
        nonlinear.push(h);
    }
    let linv = invert_rational(&lin).ok_or_else(|| VfError::FrameNotAdapted { detail: "singular differential at q".into() })?;
    // ambient displacement p − q
    let disp: Vec<Polynomial> = (0..n).map(|j| &Polynomial::var(n, j) - &Polynomial::constant(n, q[j].clone())).collect();
    let apply_linv = |v: &[Polynomial]| -> Vec<Polynomial> {
        (0..n)
            .map(|i| (0..n).fold(Polynomial::zero(n), |acc, j| &acc + &v[j].scale(&linv[i][j])))
            .collect()
    };
    let mut x = apply_linv(&disp);
    let budget = 2 * n * (max_deg + 1) + 2;
    for _ in 0..budget {
        let rhs: Vec<Polynomial> = (0..n).map(|j| &disp[j] - &nonlinear[j].compose(&x)).collect();
        let next = apply_linv(&rhs);
        if next == x {
            let check: Vec<Polynomial> = phi.iter().map(|pj| pj.compose(&x)).collect();
            if (0..n).all(|j| check[j] == Polynomial::var(n, j)) {
                return Ok(x);
            }
            break;
        }
        x = next;
    }
    Err(VfError::FlowNotTerminating { field: n, degree: max_deg })
}

fn invert_rational(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (a, b) in m[r].iter_mut().zip(&pivot_row) {
                    *a -= &f * b;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}
