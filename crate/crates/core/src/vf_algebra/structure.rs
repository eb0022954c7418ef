use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num::Zero;

use super::field::VectorField;
use super::parse::{parse_polynomial, parse_vector_field};
use super::poly::{default_var_names, Polynomial};
use super::VfError;

/// Affine shear applied when crossing a twisted-periodic axis:
/// `x_target += coeff · x_source`.
#[derive(Clone, Debug, PartialEq)]
pub struct Shear {
    pub target: usize,
    pub source: usize,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AxisDomain {
    Dirichlet { lo: f64, hi: f64 },
    Periodic { len: f64 },
    Twisted { len: f64, shear: Shear },
}

impl AxisDomain {
    pub fn length(&self) -> f64 {
        match self {
            AxisDomain::Dirichlet { lo, hi } => hi - lo,
            AxisDomain::Periodic { len } | AxisDomain::Twisted { len, .. } => *len,
        }
    }

    /// Lower end of the coordinate range. Periodic axes start at 0.
    pub fn lo(&self) -> f64 {
        match self {
            AxisDomain::Dirichlet { lo, .. } => *lo,
            _ => 0.0,
        }
    }
}

/// Vector fields, measure density and domain of a sub-Riemannian structure.
///
/// An empty `domain` denotes a local structure (for instance the
/// pushed-forward fields of a privileged chart) with no numerical box.
#[derive(Clone, Debug, PartialEq)]
pub struct SRStructure {
    pub name: String,
    dim: usize,
    fields: Vec<VectorField>,
    density: Polynomial,
    domain: Vec<AxisDomain>,
}

impl SRStructure {
    pub fn new(
        name: impl Into<String>,
        fields: Vec<VectorField>,
        density: Polynomial,
        domain: Vec<AxisDomain>,
    ) -> Result<Self, VfError> {
        let dim = density.nvars();
        if dim == 0 {
            return Err(VfError::InvalidStructure("dimension must be positive".into()));
        }
        if fields.is_empty() {
            return Err(VfError::InvalidStructure("at least one vector field is required".into()));
        }
        for f in &fields {
            if f.dim() != dim {
                return Err(VfError::DimensionMismatch { left: dim, right: f.dim() });
            }
        }
        if !domain.is_empty() && domain.len() != dim {
            return Err(VfError::InvalidStructure(format!("domain has {} axes, dimension is {dim}", domain.len())));
        }
        for (axis, d) in domain.iter().enumerate() {
            match d {
                AxisDomain::Dirichlet { lo, hi } if !(hi > lo) => {
                    return Err(VfError::InvalidStructure(format!("axis {axis}: empty interval ({lo}, {hi})")));
                }
                AxisDomain::Periodic { len } if !(*len > 0.0) => {
                    return Err(VfError::InvalidStructure(format!("axis {axis}: period must be positive")));
                }
                AxisDomain::Twisted { len, shear } => {
                    if !(*len > 0.0) {
                        return Err(VfError::InvalidStructure(format!("axis {axis}: period must be positive")));
                    }
                    // x_t += c·x_s with t ∉ {s, axis} is unit triangular, hence volume-preserving
                    if shear.target >= dim || shear.source >= dim || shear.target == shear.source || shear.target == axis {
                        return Err(VfError::InvalidStructure(format!("axis {axis}: shear is not volume-preserving")));
                    }
                }
                _ => {}
            }
        }
        let s = SRStructure { name: name.into(), dim, fields, density, domain };
        s.check_density()?;
        Ok(s)
    }

    /// Structure without a numerical domain.
    pub fn local(name: impl Into<String>, fields: Vec<VectorField>) -> Result<Self, VfError> {
        let n = fields.first().map(|f| f.dim()).unwrap_or(0);
        Self::new(name, fields, Polynomial::one(n), Vec::new())
    }

    fn check_density(&self) -> Result<(), VfError> {
        if let Some(c) = self.density.as_constant() {
            return if c > num::BigRational::zero() {
                Ok(())
            } else {
                Err(VfError::InvalidStructure("measure density must be positive".into()))
            };
        }
        if self.domain.is_empty() {
            return Ok(());
        }
        // sample a 5^N lattice of the closed box
        let n = self.dim;
        let total = 5usize.pow(n as u32);
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut r = idx;
            for (j, d) in self.domain.iter().enumerate() {
                let t = (r % 5) as f64 / 4.0;
                r /= 5;
                x[j] = d.lo() + t * d.length();
            }
            if !(self.density.eval_f64(&x) > 0.0) {
                return Err(VfError::InvalidStructure(format!("measure density not positive at {x:?}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn density(&self) -> &Polynomial {
        &self.density
    }

    pub fn domain(&self) -> &[AxisDomain] {
        &self.domain
    }

    /// Baouendi–Grushin fields `∂_x`, `x^α ∂_y` on `(−1,1) × T_{2π}`.
    pub fn grushin(alpha: u32) -> Self {
        let n = 2;
        let x = Polynomial::var(n, 0);
        let fields = vec![VectorField::partial(n, 0), VectorField::directional(x.pow(alpha), 1)];
        let domain = vec![AxisDomain::Dirichlet { lo: -1.0, hi: 1.0 }, AxisDomain::Periodic { len: 2.0 * PI }];
        Self::new(format!("grushin-{alpha}"), fields, Polynomial::one(n), domain).expect("valid Grushin structure")
    }

    /// Heisenberg fields `X = ∂_x`, `Y = ∂_y − x ∂_z` on the slab
    /// `(−√(π/2), √(π/2)) × [0, √(2π)) × [0, 2π)`.
    pub fn heisenberg() -> Self {
        let n = 3;
        let x = Polynomial::var(n, 0);
        let y = &VectorField::partial(n, 1) - &VectorField::directional(x, 2);
        let fields = vec![VectorField::partial(n, 0), y];
        let a = (PI / 2.0).sqrt();
        let domain = vec![
            AxisDomain::Dirichlet { lo: -a, hi: a },
            AxisDomain::Periodic { len: (2.0 * PI).sqrt() },
            AxisDomain::Periodic { len: 2.0 * PI },
        ];
        Self::new("heisenberg", fields, Polynomial::one(n), domain).expect("valid Heisenberg structure")
    }

    /// Same fields with a different numerical domain.
    pub fn with_domain(&self, domain: Vec<AxisDomain>) -> Result<Self, VfError> {
        Self::new(self.name.clone(), self.fields.clone(), self.density.clone(), domain)
    }

    /// Structure file text, parsable by [`parse_structure`].
    pub fn to_text(&self) -> String {
        let names = default_var_names(self.dim);
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "dimension = {}", self.dim);
        let fields: Vec<String> = self.fields.iter().map(|f| f.to_string()).collect();
        let _ = writeln!(out, "fields = {}", fields.join("; "));
        let _ = writeln!(out, "measure = {}", self.density);
        for (j, d) in self.domain.iter().enumerate() {
            let v = match d {
                AxisDomain::Dirichlet { lo, hi } => format!("dirichlet({lo:?}, {hi:?})"),
                AxisDomain::Periodic { len } => format!("periodic({len:?})"),
                AxisDomain::Twisted { len, shear } => {
                    format!("twisted({len:?}, {} += {:?}*{})", names[shear.target], shear.coeff, names[shear.source])
                }
            };
            let _ = writeln!(out, "domain.{} = {v}", names[j]);
        }
        out
    }
}

/// Lift of the Grushin family to `(x, y, z)`: `X̃_1 = ∂_x`, `X̃_2 = ∂_z + x^α ∂_y`.
///
/// For α = 1 the lift is equiregular with growth (2, 3). For α ≥ 2 it is
/// bracket-generating, but at `x = 0` the growth is (2, 2, …, 3) rather than
/// (2, 3), so equiregularity holds only away from that plane.
pub fn desingularize_grushin(alpha: u32) -> SRStructure {
    assert!(alpha >= 1, "alpha must be positive");
    let n = 3;
    let x = Polynomial::var(n, 0);
    let x2 = &VectorField::partial(n, 2) + &VectorField::directional(x.pow(alpha), 1);
    let fields = vec![VectorField::partial(n, 0), x2];
    let domain = vec![
        AxisDomain::Dirichlet { lo: -1.0, hi: 1.0 },
        AxisDomain::Periodic { len: 2.0 * PI },
        AxisDomain::Periodic { len: 2.0 * PI },
    ];
    SRStructure::new(format!("grushin-{alpha}-lifted"), fields, Polynomial::one(n), domain).expect("valid lifted structure")
}

/// The canonical projection of the lift, which forgets `z`.
pub fn project_lifted<T: Clone>(p: &[T]) -> Vec<T> {
    p[..2].to_vec()
}

/// Parse a structure file (`key = value` lines, `#` comments).
///
/// Recognized keys: `name`, `dimension`, `fields` (separated by `;`),
/// `measure`, and `domain.<axis>` with values `dirichlet(lo, hi)`,
/// `periodic(len)` or `twisted(len, <axis> += c*<axis>)`. Numbers may use
/// `pi`, `sqrt(·)`, `+ - * / ^` and parentheses.
pub fn parse_structure(text: &str) -> Result<SRStructure, VfError> {
    let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| VfError::StructureFile { line: lineno + 1, message: "expected `key = value`".into() })?;
        let k = k.trim().to_string();
        if kv.insert(k.clone(), (lineno + 1, v.trim().to_string())).is_some() {
            return Err(VfError::StructureFile { line: lineno + 1, message: format!("duplicate key `{k}`") });
        }
    }
    let take = |kv: &mut BTreeMap<String, (usize, String)>, k: &str| kv.remove(k);
    let (dline, dval) = take(&mut kv, "dimension")
        .ok_or_else(|| VfError::StructureFile { line: 0, message: "missing `dimension`".into() })?;
    let n: usize = dval
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| VfError::StructureFile { line: dline, message: "dimension must be a positive integer".into() })?;
    let name = take(&mut kv, "name").map(|(_, v)| v).unwrap_or_else(|| "custom".into());
    let (fline, fval) =
        take(&mut kv, "fields").ok_or_else(|| VfError::StructureFile { line: 0, message: "missing `fields`".into() })?;
    let fields = fval
        .split(';')
        .map(|s| parse_vector_field(s.trim(), n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| VfError::StructureFile { line: fline, message: e.to_string() })?;
    let density = match take(&mut kv, "measure") {
        Some((l, v)) => parse_polynomial(&v, n).map_err(|e| VfError::StructureFile { line: l, message: e.to_string() })?,
        None => Polynomial::one(n),
    };
    let names = default_var_names(n);
    let mut domain = Vec::new();
    for name_j in &names {
        if let Some((l, v)) = take(&mut kv, &format!("domain.{name_j}")) {
            domain.push(parse_axis(&v, &names).map_err(|m| VfError::StructureFile { line: l, message: m })?);
        }
    }
    if !domain.is_empty() && domain.len() != n {
        return Err(VfError::StructureFile { line: 0, message: "domain must be given for every axis or none".into() });
    }
    if let Some((k, (l, _))) = kv.into_iter().next() {
        return Err(VfError::StructureFile { line: l, message: format!("unknown key `{k}`") });
    }
    SRStructure::new(name, fields, density, domain)
}

fn parse_axis(v: &str, names: &[String]) -> Result<AxisDomain, String> {
    let open = v.find('(').ok_or("expected `kind(args)`")?;
    if !v.ends_with(')') {
        return Err("missing `)`".into());
    }
    let kind = v[..open].trim();
    let inner = &v[open + 1..v.len() - 1];
    let args: Vec<&str> = split_top_level(inner);
    match (kind, args.len()) {
        ("dirichlet", 2) => Ok(AxisDomain::Dirichlet { lo: eval_const(args[0])?, hi: eval_const(args[1])? }),
        ("periodic", 1) => Ok(AxisDomain::Periodic { len: eval_const(args[0])? }),
        ("twisted", 2) => {
            let len = eval_const(args[0])?;
            let (lhs, rhs) = args[1].split_once("+=").ok_or("shear must read `<axis> += c*<axis>`")?;
            let idx = |s: &str| names.iter().position(|n| n == s.trim()).ok_or(format!("unknown axis `{}`", s.trim()));
            let target = idx(lhs)?;
            let (c, src) = rhs.rsplit_once('*').ok_or("shear must read `<axis> += c*<axis>`")?;
            Ok(AxisDomain::Twisted { len, shear: Shear { target, source: idx(src)?, coeff: eval_const(c)? } })
        }
        _ => Err(format!("unrecognized domain `{v}`")),
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

/// Evaluate a constant expression such as `sqrt(pi/2)` or `-2*pi`.
pub fn eval_const(s: &str) -> Result<f64, String> {
    let mut p = ConstParser { s: s.as_bytes(), i: 0 };
    let v = p.expr()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(format!("trailing input in `{s}`"));
    }
    Ok(v)
}

struct ConstParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl ConstParser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v += self.term()?;
            } else if self.eat(b'-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, String> {
        self.ws();
        if self.eat(b'(') {
            let v = self.expr()?;
            if !self.eat(b')') {
                return Err("missing `)`".into());
            }
            return Ok(v);
        }
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'.') {
            self.i += 1;
        }
        let tok = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
        match tok {
            "" => Err("expected a number".into()),
            "pi" => Ok(PI),
            "sqrt" => {
                if !self.eat(b'(') {
                    return Err("expected `(` after sqrt".into());
                }
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err("missing `)`".into());
                }
                Ok(v.sqrt())
            }
            t => {
                // scientific notation such as 1e-3 arrives split at the sign
                if (t.ends_with('e') || t.ends_with('E')) && matches!(self.s.get(self.i), Some(b'-') | Some(b'+')) {
                    self.i += 1;
                    while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                        self.i += 1;
                    }
                    let full = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
                    return full.parse().map_err(|_| format!("malformed number `{full}`"));
                }
                t.parse().map_err(|_| format!("malformed number `{t}`"))
            }
        }
    }
}
