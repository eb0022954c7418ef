use std::collections::BTreeSet;
use std::fmt;

use num::Zero;

use super::field::{lie_bracket, VectorField};
use super::poly::{rat_frac, rat_to_f64, Polynomial, Rational};
use super::structure::SRStructure;

/// Pivot threshold for floating rank, relative to the largest pivot.
pub const FLOAT_PIVOT_TOL: f64 = 1e-10;

/// Evaluation point: exact rational coordinates or floating ones.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Point {
    pub fn exact_ints(coords: &[i64]) -> Self {
        Point::Exact(coords.iter().map(|&c| rat_frac(c, 1)).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Exact(v) => v.len(),
            Point::Float(v) => v.len(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Point::Exact(v) => v.iter().map(rat_to_f64).collect(),
            Point::Float(v) => v.clone(),
        }
    }

    /// `self + t·e_axis` with `t` given exactly.
    fn shifted(&self, axis: usize, t: &Rational) -> Point {
        match self {
            Point::Exact(v) => {
                let mut w = v.clone();
                w[axis] += t;
                Point::Exact(w)
            }
            Point::Float(v) => {
                let mut w = v.clone();
                w[axis] += rat_to_f64(t);
                Point::Float(w)
            }
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Exact(v) => {
                let s: Vec<String> = v.iter().map(|r| r.to_string()).collect();
                write!(f, "({})", s.join(", "))
            }
            Point::Float(v) => {
                let s: Vec<String> = v.iter().map(|r| format!("{r}")).collect();
                write!(f, "({})", s.join(", "))
            }
        }
    }
}

/// Incremental row-echelon span, exact or floating.
pub(crate) enum Span {
    Exact { rows: Vec<(usize, Vec<Rational>)> },
    Float { rows: Vec<(usize, Vec<f64>)>, max_pivot: f64 },
}

impl Span {
    pub(crate) fn for_point(q: &Point) -> Self {
        match q {
            Point::Exact(_) => Span::Exact { rows: Vec::new() },
            Point::Float(_) => Span::Float { rows: Vec::new(), max_pivot: 0.0 },
        }
    }

    pub(crate) fn rank(&self) -> usize {
        match self {
            Span::Exact { rows } => rows.len(),
            Span::Float { rows, .. } => rows.len(),
        }
    }

    /// Add the value of `v` at `q`; true when the rank grows.
    pub(crate) fn insert_field(&mut self, v: &VectorField, q: &Point) -> bool {
        match (self, q) {
            (Span::Exact { rows }, Point::Exact(p)) => insert_exact(rows, v.eval(p), true),
            (Span::Float { rows, max_pivot }, Point::Float(p)) => insert_float(rows, max_pivot, v.eval_f64(p), true),
            _ => unreachable!("span and point kinds agree by construction"),
        }
    }

    /// Whether the value of `v` at `q` already lies in the span.
    pub(crate) fn contains_field(&mut self, v: &VectorField, q: &Point) -> bool {
        match (self, q) {
            (Span::Exact { rows }, Point::Exact(p)) => !insert_exact(rows, v.eval(p), false),
            (Span::Float { rows, max_pivot }, Point::Float(p)) => !insert_float(rows, max_pivot, v.eval_f64(p), false),
            _ => unreachable!("span and point kinds agree by construction"),
        }
    }
}

fn insert_exact(rows: &mut Vec<(usize, Vec<Rational>)>, mut v: Vec<Rational>, commit: bool) -> bool {
    for (piv, row) in rows.iter() {
        if !v[*piv].is_zero() {
            let f = v[*piv].clone();
            for (a, b) in v.iter_mut().zip(row) {
                *a -= &f * b;
            }
        }
    }
    let Some(p) = v.iter().position(|x| !x.is_zero()) else { return false };
    if commit {
        let inv = v[p].recip();
        let row: Vec<Rational> = v.iter().map(|x| x * &inv).collect();
        // keep the basis fully reduced so later eliminations see unit pivots
        for (_, r) in rows.iter_mut() {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (a, b) in r.iter_mut().zip(&row) {
                    *a -= &f * b;
                }
            }
        }
        rows.push((p, row));
    }
    true
}

fn insert_float(rows: &mut Vec<(usize, Vec<f64>)>, max_pivot: &mut f64, mut v: Vec<f64>, commit: bool) -> bool {
    let scale0 = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (piv, row) in rows.iter() {
        let f = v[*piv];
        if f != 0.0 {
            for (a, b) in v.iter_mut().zip(row) {
                *a -= f * b;
            }
        }
    }
    let (p, mag) = v.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    let reference = max_pivot.max(scale0);
    if reference == 0.0 || mag <= FLOAT_PIVOT_TOL * reference {
        return false;
    }
    if commit {
        *max_pivot = max_pivot.max(mag);
        let inv = 1.0 / v[p];
        let row: Vec<f64> = v.iter().map(|x| x * inv).collect();
        for (_, r) in rows.iter_mut() {
            let f = r[p];
            if f != 0.0 {
                for (a, b) in r.iter_mut().zip(&row) {
                    *a -= f * b;
                }
            }
        }
        rows.push((p, row));
    }
    true
}

/// Right-nested brackets grouped by length: level `j` holds the distinct
/// nonzero brackets `[X_{i1}, [X_{i2}, … X_{ij}]]`.
pub fn bracket_levels(fields: &[VectorField], depth: usize) -> Vec<Vec<VectorField>> {
    let mut levels: Vec<Vec<VectorField>> = Vec::new();
    let mut seen: BTreeSet<VectorField> = BTreeSet::new();
    let first: Vec<VectorField> = fields.iter().filter(|f| !f.is_zero()).cloned().collect();
    seen.extend(first.iter().cloned());
    levels.push(first);
    while levels.len() < depth {
        let prev = levels.last().unwrap();
        let mut next = Vec::new();
        for x in fields {
            for v in prev {
                let b = lie_bracket(x, v).expect("fields share a dimension");
                if !b.is_zero() && seen.insert(b.clone()) {
                    next.push(b);
                }
            }
        }
        levels.push(next);
    }
    levels
}

/// Flag data of the structure at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagData {
    /// `n_1(q) ≤ … ≤ n_r(q)`.
    pub growth_vector: Vec<usize>,
    pub step: usize,
    pub weights: Vec<usize>,
    pub homogeneous_dimension: usize,
    /// Sampled regularity: the growth vector agrees at the `2N` axis
    /// neighbours at the sampling radius.
    pub regular: bool,
    /// False when `n_r < N` at the depth limit.
    pub complete: bool,
}

impl FlagData {
    fn from_growth(growth: Vec<usize>, n: usize, regular: bool) -> Self {
        let mut weights = Vec::new();
        let mut prev = 0;
        for (j, &nj) in growth.iter().enumerate() {
            weights.extend(std::iter::repeat_n(j + 1, nj - prev));
            prev = nj;
        }
        let complete = growth.last() == Some(&n);
        FlagData {
            step: growth.len(),
            homogeneous_dimension: weights.iter().sum(),
            growth_vector: growth,
            weights,
            regular,
            complete,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlagOptions {
    /// Sampling radius used for the regularity decision.
    pub sample_radius: Rational,
}

impl Default for FlagOptions {
    fn default() -> Self {
        FlagOptions { sample_radius: rat_frac(1, 100) }
    }
}

/// Growth vector at `q` only, stopping once the span is full.
pub fn growth_vector(s: &SRStructure, q: &Point, depth_max: usize) -> Vec<usize> {
    assert!(depth_max >= 1, "depth_max must be at least 1");
    assert_eq!(q.dim(), s.dim(), "point dimension mismatch");
    let n = s.dim();
    let levels = bracket_levels(s.fields(), depth_max);
    let mut span = Span::for_point(q);
    let mut growth = Vec::new();
    for level in &levels {
        for v in level {
            if span.rank() == n {
                break;
            }
            span.insert_field(v, q);
        }
        growth.push(span.rank());
        if span.rank() == n {
            break;
        }
    }
    growth
}

pub fn compute_flag(s: &SRStructure, q: &Point, depth_max: usize) -> FlagData {
    compute_flag_with(s, q, depth_max, &FlagOptions::default())
}

pub fn compute_flag_with(s: &SRStructure, q: &Point, depth_max: usize, opts: &FlagOptions) -> FlagData {
    let growth = growth_vector(s, q, depth_max);
    let mut regular = true;
    'outer: for axis in 0..s.dim() {
        for sign in [1i64, -1] {
            let t = &opts.sample_radius * rat_frac(sign, 1);
            if growth_vector(s, &q.shifted(axis, &t), depth_max) != growth {
                regular = false;
                break 'outer;
            }
        }
    }
    FlagData::from_growth(growth, s.dim(), regular)
}

#[derive(Clone, Debug)]
pub struct HormanderEntry {
    pub point: Point,
    pub growth_vector: Vec<usize>,
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct HormanderReport {
    pub entries: Vec<HormanderEntry>,
    pub pass: bool,
}

pub fn check_hormander(s: &SRStructure, points: &[Point], depth_max: usize) -> HormanderReport {
    assert!(!points.is_empty(), "sample set must be nonempty");
    let entries: Vec<HormanderEntry> = points
        .iter()
        .map(|q| {
            let g = growth_vector(s, q, depth_max);
            HormanderEntry { point: q.clone(), complete: g.last() == Some(&s.dim()), growth_vector: g }
        })
        .collect();
    let pass = entries.iter().all(|e| e.complete);
    HormanderReport { entries, pass }
}

/// Non-holonomic order of a function at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Exactly(usize),
    /// No word of length `≤ p_max` detects the function; the order is at least this value.
    AtLeast(usize),
}

/// Smallest `p` with `X_{i1}⋯X_{ip} f (q) ≠ 0`, by breadth-first application.
pub fn nonholonomic_order(s: &SRStructure, f: &Polynomial, q: &Point, p_max: usize) -> Order {
    let nonzero_at = |g: &Polynomial| match q {
        Point::Exact(p) => !g.eval(p).is_zero(),
        Point::Float(p) => {
            let scale: f64 = g.terms().map(|(_, c)| rat_to_f64(c).abs()).fold(0.0, f64::max);
            g.eval_f64(p).abs() > 1e-12 * scale.max(1.0)
        }
    };
    let mut frontier: BTreeSet<Polynomial> = BTreeSet::new();
    if !f.is_zero() {
        frontier.insert(f.clone());
    }
    for p in 0..=p_max {
        if frontier.iter().any(nonzero_at) {
            return Order::Exactly(p);
        }
        if p == p_max || frontier.is_empty() {
            break;
        }
        let mut next = BTreeSet::new();
        for g in &frontier {
            for x in s.fields() {
                let h = x.apply(g);
                if !h.is_zero() {
                    next.insert(h);
                }
            }
        }
        frontier = next;
    }
    Order::AtLeast(p_max + 1)
}
