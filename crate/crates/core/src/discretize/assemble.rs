use crate::vf_algebra::{divergence, CompiledPoly, SRStructure, VectorField};

use super::grid::{Axis, Grid};
use super::operator::{Csr, OperatorMeta, SparseSymmetricOperator};
use super::DiscretizeError;

/// One-sided difference operators `D^+`, `D^-` of a field, mapping grid
/// unknowns to values at every node (walls included).
///
/// `(D^s u)_p = Σ_j a_j(x_p + s h_j e_j / 2) · s (u_{p + s e_j} − u_p) / h_j`,
/// with wall values zero.
#[derive(Clone, Debug)]
pub struct DifferenceOperator {
    pub field_index: usize,
    pub plus: Csr,
    pub minus: Csr,
}

impl DifferenceOperator {
    pub fn sides(&self) -> [&Csr; 2] {
        [&self.plus, &self.minus]
    }
}

fn one_sided(g: &Grid, comps: &[CompiledPoly], s: i64) -> Csr {
    let n = g.dim();
    let mut trip = Vec::new();
    let mut x = vec![0.0; n];
    for p in 0..g.n_nodes() {
        let m = g.node_multi(p);
        let up = g.multi_to_unknown(&m);
        for (j, a) in comps.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ax: &Axis = g.axis(j);
            let Some(q) = g.neighbor(p, j, s) else { continue };
            for (k, (&i, axk)) in m.iter().zip(g.axes()).enumerate() {
                x[k] = axk.coord(i);
            }
            x[j] += s as f64 * ax.h / 2.0;
            let c = a.eval(&x) * s as f64 / ax.h;
            if c == 0.0 {
                continue;
            }
            if let Some(uq) = g.node_to_unknown(q) {
                trip.push((p, uq, c));
            }
            if let Some(u) = up {
                trip.push((p, u, -c));
            }
        }
    }
    Csr::from_triplets(g.n_nodes(), g.n_unknowns(), trip)
}

/// Difference operators for every field of `s` on `g`.
pub fn difference_operators(fields: &[VectorField], g: &Grid) -> Vec<DifferenceOperator> {
    fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let comps = f.compile();
            DifferenceOperator { field_index: i, plus: one_sided(g, &comps, 1), minus: one_sided(g, &comps, -1) }
        })
        .collect()
}

/// Density at every node.
pub fn node_weights(s: &SRStructure, g: &Grid) -> Vec<f64> {
    let rho = s.density().compile();
    (0..g.n_nodes()).map(|p| rho.eval(&g.node_coords(p))).collect()
}

/// `½ Σ_i Σ_s (D_i^s)ᵀ M D_i^s`.
pub fn assemble_from_differences(ops: &[DifferenceOperator], weights: &[f64], n_unknowns: usize) -> Csr {
    let mut trip = Vec::new();
    for op in ops {
        for d in op.sides() {
            for p in 0..d.nrows {
                let w = 0.5 * weights[p];
                let row: Vec<(usize, f64)> = d.row(p).collect();
                for &(c1, v1) in &row {
                    for &(c2, v2) in &row {
                        trip.push((c1, c2, w * v1 * v2));
                    }
                }
            }
        }
    }
    Csr::from_triplets(n_unknowns, n_unknowns, trip)
}

fn check_compatible(s: &SRStructure, g: &Grid) -> Result<(), DiscretizeError> {
    if s.dim() != g.dim() {
        return Err(DiscretizeError::DimensionMismatch { expected: s.dim(), got: g.dim() });
    }
    Ok(())
}

/// Sub-Laplacian `−Δ = Σ X_i^* X_i` on the grid.
///
/// Fields with nonzero μ-divergence are rejected: their adjoint carries a
/// zeroth-order term this scheme does not model.
pub fn assemble_sublaplacian(s: &SRStructure, g: &Grid) -> Result<SparseSymmetricOperator, DiscretizeError> {
    check_compatible(s, g)?;
    for (i, f) in s.fields().iter().enumerate() {
        let div = divergence(f, s).map_err(|_| DiscretizeError::NonzeroDivergence { field: i, divergence: "non-polynomial".into() })?;
        if !div.is_zero() {
            return Err(DiscretizeError::NonzeroDivergence { field: i, divergence: div.to_string() });
        }
    }
    let w = node_weights(s, g);
    if let Some(p) = w.iter().position(|&v| !(v > 0.0)) {
        return Err(DiscretizeError::NonPositiveDensity { node: p });
    }
    let ops = difference_operators(s.fields(), g);
    let matrix = assemble_from_differences(&ops, &w, g.n_unknowns());
    let mass = (0..g.n_unknowns()).map(|u| w[g.unknown_to_node(u)]).collect();
    let meta = OperatorMeta { structure_id: s.name.clone(), grid_id: g.id.clone(), scheme: "pm-average".into() };
    Ok(SparseSymmetricOperator::new(matrix, mass, meta))
}

/// `Δ_sR + ε² Δ_h` with `Δ_h` the coordinate Laplacian on the same grid.
pub fn assemble_riemannian_blend(s: &SRStructure, g: &Grid, eps: f64) -> Result<SparseSymmetricOperator, DiscretizeError> {
    assert!(eps >= 0.0, "blend parameter must be non-negative");
    let base = assemble_sublaplacian(s, g)?;
    if eps == 0.0 {
        return Ok(base);
    }
    let coords: Vec<VectorField> = (0..s.dim()).map(|j| VectorField::partial(s.dim(), j)).collect();
    let ops = difference_operators(&coords, g);
    let w = node_weights(s, g);
    let h = assemble_from_differences(&ops, &w, g.n_unknowns());
    let matrix = base.matrix.add_scaled(&h, eps * eps);
    let meta = OperatorMeta { scheme: format!("pm-average+blend({eps})"), ..base.meta };
    Ok(SparseSymmetricOperator::new(matrix, base.mass, meta))
}

/// Potential of a 1-D Schrödinger operator `−d²/dx² + V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    /// `k² x^{2α}`.
    Power { k: f64, alpha: u32 },
    /// `m² x²`.
    Harmonic { m: f64 },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Power { k, alpha } => k * k * x.powi(2 * alpha as i32),
            Potential::Harmonic { m } => m * m * x * x,
        }
    }
}

/// Dirichlet grid with `n` interior nodes on `(lo, hi)`, `h = (hi − lo)/(n + 1)`.
pub fn schrodinger_grid(lo: f64, hi: f64, n: usize) -> Result<Grid, DiscretizeError> {
    Grid::new(format!("1d-{n}"), vec![Axis::dirichlet(lo, hi, n + 2)])
}

/// Tridiagonal `(2/h² + V(x_i), −1/h²)` on `n` interior nodes.
pub fn assemble_schrodinger_1d(pot: Potential, interval: (f64, f64), n: usize) -> Result<SparseSymmetricOperator, DiscretizeError> {
    if n < 16 {
        return Err(DiscretizeError::InvalidCount { axis: 0, count: n });
    }
    let g = schrodinger_grid(interval.0, interval.1, n)?;
    let h = g.axis(0).h;
    let inv = 1.0 / (h * h);
    let mut trip = Vec::with_capacity(3 * n);
    for i in 0..n {
        let x = g.axis(0).coord(i + 1);
        trip.push((i, i, 2.0 * inv + pot.eval(x)));
        if i + 1 < n {
            trip.push((i, i + 1, -inv));
            trip.push((i + 1, i, -inv));
        }
    }
    let meta = OperatorMeta { structure_id: format!("{pot:?}"), grid_id: g.id.clone(), scheme: "three-point".into() };
    Ok(SparseSymmetricOperator::new(Csr::from_triplets(n, n, trip), vec![1.0; n], meta))
}
