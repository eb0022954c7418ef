//! Nodal domains of grid functions, the Courant-type bound and directional
//! sign-change counts.
//!
//! Grid functions live on the unknowns of a [`Grid`]; Dirichlet wall nodes
//! are the boundary and belong to no domain. Adjacency is the 2N axis
//! neighbours, wrapping on periodic axes.

use std::io;

use petgraph::unionfind::UnionFind;

use crate::discretize::{Boundary, Grid};
use crate::eigensolve::{mode_clusters, EigenPair};

/// Label of a nodal (near-zero) node.
pub const NODAL: usize = 0;

/// Nodes with `|v| ≤ DEFAULT_ZERO_TOL · max|v|` are nodal.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NodalError {
    #[error("vector has {got} entries, grid has {expected} unknowns")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("line outside the grid: {0}")]
    LineOutsideGrid(String),
}

/// Axis edge between unknown `a` and its `+1` neighbour `b` along `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridEdge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodalDecomposition {
    /// Per unknown: [`NODAL`] or a domain id in `1..=domain_count`, numbered
    /// by first occurrence in unknown order.
    pub labels: Vec<usize>,
    pub domain_count: usize,
    /// `domain_sizes[i]` counts the nodes of domain `i + 1`.
    pub domain_sizes: Vec<usize>,
    /// Unknowns whose value is below the zero threshold.
    pub nodal_nodes: Vec<usize>,
    /// Edges joining opposite signs.
    pub sign_change_edges: Vec<GridEdge>,
}

impl NodalDecomposition {
    pub fn is_all_nodal(&self) -> bool {
        self.domain_count == 0
    }

    pub fn has_nodal_cells(&self) -> bool {
        !self.nodal_nodes.is_empty() || !self.sign_change_edges.is_empty()
    }

    /// Coordinates of the nodal cells: nodal nodes, then edge midpoints.
    pub fn cell_points(&self, g: &Grid) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = self.nodal_nodes.iter().map(|&u| g.unknown_coords(u)).collect();
        pts.extend(self.sign_change_edges.iter().map(|e| edge_midpoint(g, e)));
        pts
    }

    /// One line per nodal cell: space-separated coordinates.
    pub fn write_cells(&self, g: &Grid, w: &mut impl io::Write) -> io::Result<()> {
        writeln!(w, "# nodal cells {} domains {}", self.nodal_nodes.len() + self.sign_change_edges.len(), self.domain_count)?;
        for p in self.cell_points(g) {
            let c: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", c.join(" "))?;
        }
        Ok(())
    }
}

/// Midpoint of an edge, in the unwrapped coordinates of its first node.
pub fn edge_midpoint(g: &Grid, e: &GridEdge) -> Vec<f64> {
    let mut x = g.unknown_coords(e.a);
    x[e.axis] += 0.5 * g.axis(e.axis).h;
    x
}

/// All axis edges between unknowns, in unknown order.
pub fn grid_edges(g: &Grid) -> Vec<GridEdge> {
    let mut edges = Vec::new();
    for a in 0..g.n_unknowns() {
        let node = g.unknown_to_node(a);
        for axis in 0..g.dim() {
            let Some(nb) = g.neighbor(node, axis, 1) else { continue };
            if let Some(b) = g.node_to_unknown(nb) {
                if b != a {
                    edges.push(GridEdge { a, b, axis });
                }
            }
        }
    }
    edges
}

pub fn nodal_decomposition(g: &Grid, v: &[f64], zero_tol: f64) -> Result<NodalDecomposition, NodalError> {
    nodal_decomposition_with_edges(g, v, zero_tol, &grid_edges(g))
}

/// Same as [`nodal_decomposition`] over an explicit edge list; the
/// partition does not depend on the order of `edges`.
pub fn nodal_decomposition_with_edges(
    g: &Grid,
    v: &[f64],
    zero_tol: f64,
    edges: &[GridEdge],
) -> Result<NodalDecomposition, NodalError> {
    let n = g.n_unknowns();
    if v.len() != n {
        return Err(NodalError::DimensionMismatch { expected: n, got: v.len() });
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thr = zero_tol.max(0.0) * vmax;
    let sign: Vec<i8> = v.iter().map(|&x| if vmax == 0.0 || x.abs() <= thr { 0 } else if x > 0.0 { 1 } else { -1 }).collect();

    let mut uf = UnionFind::<usize>::new(n);
    let mut sign_change_edges = Vec::new();
    for e in edges {
        match sign[e.a] * sign[e.b] {
            1 => {
                uf.union(e.a, e.b);
            }
            -1 => sign_change_edges.push(*e),
            _ => {}
        }
    }
    sign_change_edges.sort();

    let mut labels = vec![NODAL; n];
    let mut root_label = vec![NODAL; n];
    let mut domain_sizes = Vec::new();
    let mut nodal_nodes = Vec::new();
    for u in 0..n {
        if sign[u] == 0 {
            nodal_nodes.push(u);
            continue;
        }
        let r = uf.find(u);
        if root_label[r] == NODAL {
            domain_sizes.push(0);
            root_label[r] = domain_sizes.len();
        }
        labels[u] = root_label[r];
        domain_sizes[labels[u] - 1] += 1;
    }
    Ok(NodalDecomposition { labels, domain_count: domain_sizes.len(), domain_sizes, nodal_nodes, sign_change_edges })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CourantRow {
    /// 1-based index `n` of the first eigenvalue of the mode's cluster.
    pub mode_index: usize,
    pub eigenvalue: f64,
    pub mult: usize,
    pub domain_count: usize,
    /// `n + mult − 1`.
    pub courant_bound: usize,
    pub pass: bool,
    /// `domain_count ≤ n`.
    pub strong_pass: bool,
    /// Distance to the next cluster, for auditing borderline multiplicities.
    pub cluster_gap: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CourantReport {
    pub rows: Vec<CourantRow>,
    pub violations: usize,
    pub strong_violations: usize,
}

impl CourantReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }

    pub fn write_csv(&self, w: impl io::Write) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode_index", "eigenvalue", "mult", "domain_count", "courant_bound", "pass", "strong_pass", "cluster_gap"])?;
        for r in &self.rows {
            out.write_record([
                r.mode_index.to_string(),
                format!("{:?}", r.eigenvalue),
                r.mult.to_string(),
                r.domain_count.to_string(),
                r.courant_bound.to_string(),
                r.pass.to_string(),
                r.strong_pass.to_string(),
                format!("{:?}", r.cluster_gap),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Check `count ≤ n + mult − 1` for every mode of a sorted spectrum.
pub fn courant_check(spectrum: &[EigenPair], decompositions: &[NodalDecomposition]) -> CourantReport {
    assert_eq!(spectrum.len(), decompositions.len(), "one decomposition per mode");
    let values: Vec<f64> = spectrum.iter().map(|p| p.value).collect();
    let rows: Vec<CourantRow> = mode_clusters(&values)
        .into_iter()
        .zip(spectrum.iter().zip(decompositions))
        .map(|(c, (p, d))| {
            let n = c.first + 1;
            let bound = n + c.mult - 1;
            CourantRow {
                mode_index: n,
                eigenvalue: p.value,
                mult: c.mult,
                domain_count: d.domain_count,
                courant_bound: bound,
                pass: d.domain_count <= bound,
                strong_pass: d.domain_count <= n,
                cluster_gap: c.gap_above,
            }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.pass).count();
    let strong_violations = rows.iter().filter(|r| !r.strong_pass).count();
    CourantReport { rows, violations, strong_violations }
}

/// Sign changes of `v` along the coordinate line through node `through`
/// (a node multi-index) parallel to `axis`. Near-zero values are skipped
/// and periodic lines are read circularly.
pub fn directional_crossing_count(g: &Grid, v: &[f64], axis: usize, through: &[usize]) -> Result<usize, NodalError> {
    if v.len() != g.n_unknowns() {
        return Err(NodalError::DimensionMismatch { expected: g.n_unknowns(), got: v.len() });
    }
    if axis >= g.dim() || through.len() != g.dim() {
        return Err(NodalError::LineOutsideGrid(format!("axis {axis}, point {through:?}")));
    }
    if through.iter().zip(g.axes()).any(|(&i, a)| i >= a.count) {
        return Err(NodalError::LineOutsideGrid(format!("point {through:?} outside {}", g.id)));
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut m = through.to_vec();
    let mut line = Vec::new();
    for i in 0..g.axis(axis).count {
        m[axis] = i;
        if let Some(u) = g.multi_to_unknown(&m) {
            line.push(v[u]);
        }
    }
    Ok(sign_changes(&line, g.axis(axis).boundary == Boundary::Periodic, DEFAULT_ZERO_TOL * vmax))
}

/// Sign changes along a sequence, skipping entries with `|x| ≤ thr`; a
/// circular sequence also compares its last and first entries.
pub fn sign_changes(values: &[f64], circular: bool, thr: f64) -> usize {
    let signs: Vec<bool> = values.iter().filter(|x| x.abs() > thr).map(|&x| x > 0.0).collect();
    let mut count = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if circular && signs.len() > 1 && signs[0] != signs[signs.len() - 1] {
        count += 1;
    }
    count
}
