//! Expression grammar for polynomials and vector fields.
//!
//! ```text
//! field    = ["+" | "-"] term { ("+" | "-") term } | "0"
//! term     = factor { "*" factor }
//! factor   = number [ "/" number ] | var [ "^" integer ] | "d" var
//! number   = digits [ "." digits ]
//! var      = "x" | "y" | "z" | "w" | "x" integer
//! ```
//!
//! A vector-field term carries exactly one `d<var>` factor; a polynomial term
//! carries none. `−` (U+2212) is accepted as a minus sign.

use num::{BigInt, One, Zero};

use super::field::VectorField;
use super::poly::{default_var_names, Polynomial, Rational};
use super::VfError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, VfError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' | '\u{2212}' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '/' => out.push((start, Tok::Slash)),
            '^' => out.push((start, Tok::Caret)),
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let value = parse_decimal(&s).ok_or_else(|| VfError::Parse {
                    position: start,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push((start, Tok::Num(value)));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push((start, Tok::Ident(chars[i..j].iter().collect())));
                i = j;
                continue;
            }
            other => {
                return Err(VfError::Parse { position: start, message: format!("unexpected character `{other}`") });
            }
        }
        i += 1;
    }
    Ok(out)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let mut parts = s.split('.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if parts.next().is_some() || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num::pow(BigInt::from(10), frac.len());
    Some(Rational::new(num, den))
}

/// Resolve a coordinate name to its axis index.
fn resolve_var(name: &str, n: usize, position: usize) -> Result<Option<usize>, VfError> {
    let short = ["x", "y", "z", "w"];
    let idx = if let Some(k) = short.iter().position(|s| *s == name) {
        if n > 4 {
            // long form only above four axes, to keep `x` unambiguous
            return Ok(None);
        }
        Some(k)
    } else if let Some(rest) = name.strip_prefix('x') {
        match rest.parse::<usize>() {
            Ok(k) if k >= 1 => Some(k - 1),
            _ => None,
        }
    } else {
        None
    };
    match idx {
        Some(k) if k >= n => Err(VfError::IndexOutOfRange { name: name.to_string(), position, dimension: n }),
        other => Ok(other),
    }
}

struct Term {
    pos: usize,
    coeff: Rational,
    exps: Vec<u32>,
    deriv: Option<usize>,
}

fn parse_terms(text: &str, n: usize, want_deriv: bool) -> Result<Vec<Term>, VfError> {
    let toks = lex(text)?;
    let end = text.chars().count();
    if toks.is_empty() {
        return Err(VfError::Parse { position: 0, message: "empty expression".into() });
    }
    let mut terms = Vec::new();
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut sign = Rational::one();
        match &toks[i].1 {
            Tok::Plus => i += 1,
            Tok::Minus => {
                sign = -sign;
                i += 1;
            }
            _ if first => {}
            _ => {
                return Err(VfError::Parse { position: toks[i].0, message: "expected `+` or `-` between terms".into() });
            }
        }
        first = false;
        let pos = toks.get(i).map(|t| t.0).unwrap_or(end);
        let mut term = Term { pos, coeff: sign, exps: vec![0; n], deriv: None };
        let mut expect_factor = true;
        while i < toks.len() {
            let (pos, tok) = &toks[i];
            if !expect_factor {
                match tok {
                    Tok::Star => {
                        expect_factor = true;
                        i += 1;
                        continue;
                    }
                    Tok::Plus | Tok::Minus => break,
                    _ => return Err(VfError::Parse { position: *pos, message: "expected `*`, `+` or `-`".into() }),
                }
            }
            match tok {
                Tok::Num(v) => {
                    let mut v = v.clone();
                    if let Some((_, Tok::Slash)) = toks.get(i + 1) {
                        match toks.get(i + 2) {
                            Some((p, Tok::Num(d))) => {
                                if d.is_zero() {
                                    return Err(VfError::Parse { position: *p, message: "division by zero".into() });
                                }
                                v /= d.clone();
                                i += 2;
                            }
                            Some((p, _)) => {
                                return Err(VfError::Parse { position: *p, message: "expected a number after `/`".into() })
                            }
                            None => return Err(VfError::Parse { position: end, message: "expected a number after `/`".into() }),
                        }
                    }
                    term.coeff *= v;
                }
                Tok::Ident(name) => {
                    if let Some(var) = resolve_var(name, n, *pos)? {
                        let mut k = 1u32;
                        if let Some((_, Tok::Caret)) = toks.get(i + 1) {
                            match toks.get(i + 2) {
                                Some((p, Tok::Num(e))) => {
                                    if !e.is_integer() || e < &Rational::zero() {
                                        return Err(VfError::Parse { position: *p, message: "exponent must be a non-negative integer".into() });
                                    }
                                    k = e.to_integer().try_into().map_err(|_| VfError::Parse {
                                        position: *p,
                                        message: "exponent too large".into(),
                                    })?;
                                    i += 2;
                                }
                                Some((p, _)) => {
                                    return Err(VfError::Parse { position: *p, message: "expected an exponent after `^`".into() })
                                }
                                None => return Err(VfError::Parse { position: end, message: "expected an exponent after `^`".into() }),
                            }
                        }
                        term.exps[var] += k;
                    } else if let Some(rest) = name.strip_prefix('d') {
                        let var = resolve_var(rest, n, *pos)?.ok_or_else(|| VfError::Parse {
                            position: *pos,
                            message: format!("unknown symbol `{name}`"),
                        })?;
                        if !want_deriv {
                            return Err(VfError::Parse { position: *pos, message: "derivative symbol in a polynomial".into() });
                        }
                        if term.deriv.is_some() {
                            return Err(VfError::Parse { position: *pos, message: "more than one derivative in a term".into() });
                        }
                        term.deriv = Some(var);
                    } else {
                        return Err(VfError::Parse { position: *pos, message: format!("unknown symbol `{name}`") });
                    }
                }
                _ => return Err(VfError::Parse { position: *pos, message: "expected a number or a symbol".into() }),
            }
            expect_factor = false;
            i += 1;
        }
        if expect_factor {
            let pos = toks.get(i).map(|t| t.0).unwrap_or(end);
            return Err(VfError::Parse { position: pos, message: "incomplete term".into() });
        }
        terms.push(term);
    }
    Ok(terms)
}

pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial, VfError> {
    let terms = parse_terms(text, n, false)?;
    Ok(Polynomial::from_terms(n, terms.into_iter().map(|t| (t.exps, t.coeff))))
}

/// Parse a vector field such as `dy - x*dz` in dimension `n`.
pub fn parse_vector_field(text: &str, n: usize) -> Result<VectorField, VfError> {
    let trimmed = text.trim();
    if trimmed == "0" {
        return Ok(VectorField::zero(n));
    }
    let terms = parse_terms(text, n, true)?;
    let mut comps = vec![Polynomial::zero(n); n];
    for t in terms {
        let j = match t.deriv {
            Some(j) => j,
            None => {
                return Err(VfError::Parse {
                    position: t.pos,
                    message: "every term of a vector field needs a `d<var>` factor".into(),
                })
            }
        };
        comps[j] = &comps[j] + &Polynomial::monomial(n, t.exps, t.coeff);
    }
    VectorField::new(comps)
}

/// Variable names accepted by the parser in dimension `n`, in axis order.
pub fn var_names(n: usize) -> Vec<String> {
    default_var_names(n)
}
