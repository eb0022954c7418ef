use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::poly::{default_var_names, monomial_body, push_signed_term, CompiledPoly, Polynomial, Rational};
use super::VfError;

/// First-order differential operator `Σ_j a_j(x) ∂_{x_j}` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VectorField {
    comps: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(comps: Vec<Polynomial>) -> Result<Self, VfError> {
        let n = comps.len();
        if let Some(bad) = comps.iter().find(|p| p.nvars() != n) {
            return Err(VfError::DimensionMismatch { left: n, right: bad.nvars() });
        }
        Ok(VectorField { comps })
    }

    pub fn zero(n: usize) -> Self {
        VectorField { comps: vec![Polynomial::zero(n); n] }
    }

    /// The coordinate field `∂_{x_j}`.
    pub fn partial(n: usize, j: usize) -> Self {
        let mut v = Self::zero(n);
        v.comps[j] = Polynomial::one(n);
        v
    }

    /// `coeff · ∂_{x_j}`.
    pub fn directional(coeff: Polynomial, j: usize) -> Self {
        let mut v = Self::zero(coeff.nvars());
        v.comps[j] = coeff;
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.comps
    }

    pub fn component(&self, j: usize) -> &Polynomial {
        &self.comps[j]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Polynomial::is_zero)
    }

    /// Apply the field to a function: `X f = Σ_j a_j ∂_j f`.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.dim());
        for (j, a) in self.comps.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let d = f.derivative(j);
            if !d.is_zero() {
                out = &out + &(a * &d);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        VectorField { comps: self.comps.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn mul_poly(&self, f: &Polynomial) -> Self {
        VectorField { comps: self.comps.iter().map(|p| p * f).collect() }
    }

    pub fn eval(&self, q: &[Rational]) -> Vec<Rational> {
        self.comps.iter().map(|p| p.eval(q)).collect()
    }

    pub fn eval_f64(&self, q: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval_f64(q)).collect()
    }

    pub fn compile(&self) -> Vec<CompiledPoly> {
        self.comps.iter().map(Polynomial::compile).collect()
    }

    /// Printer matching the parser grammar, e.g. `dy - x*dz`.
    pub fn display_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        let mut first = true;
        for (j, p) in self.comps.iter().enumerate() {
            for (e, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
                let mut body = monomial_body(e, names);
                body.push(format!("d{}", names[j]));
                push_signed_term(&mut out, first, c, body);
                first = false;
            }
        }
        if first {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&default_var_names(self.dim())))
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField { comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField { comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        VectorField { comps: self.comps.iter().map(|a| -a).collect() }
    }
}

/// `[X, Y] = X∘Y − Y∘X`, component-wise `X(Y_j) − Y(X_j)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, VfError> {
    if x.dim() != y.dim() {
        return Err(VfError::DimensionMismatch { left: x.dim(), right: y.dim() });
    }
    let comps = (0..x.dim()).map(|j| &x.apply(&y.comps[j]) - &y.apply(&x.comps[j])).collect();
    Ok(VectorField { comps })
}

/// Sum of `ε`-powers times fields, the symbolic value of a dilated field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonSeries {
    pub terms: std::collections::BTreeMap<i64, VectorField>,
}

impl EpsilonSeries {
    /// Substitute a nonzero rational for `ε`.
    pub fn at(&self, eps: &Rational, dim: usize) -> VectorField {
        let mut out = VectorField::zero(dim);
        for (&k, v) in &self.terms {
            out = &out + &v.scale(&eps.pow(k as i32));
        }
        out
    }
}

impl fmt::Display for EpsilonSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| if *k == 0 { format!("({v})") } else { format!("eps^{k}*({v})") })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
