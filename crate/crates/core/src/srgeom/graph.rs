//! Implicit stencil graphs and Dijkstra distance maps.
//!
//! Nodes are all grid nodes, walls included. Edge costs depend only on the
//! offset and on the coordinates the field coefficients actually depend on,
//! so they are tabulated once per (offset, relevant coordinates) instead of
//! being stored per edge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::discretize::{Boundary, Grid};
use crate::vf_algebra::SRStructure;

use super::metric::{min_norm_solve, ControlMetric};
use super::SrError;

/// Which edges the graph has.
#[derive(Clone, Debug, PartialEq)]
pub enum StencilSpec {
    /// Every primitive integer offset with `|o_a| ≤ radius[a]`; an edge
    /// exists when the displacement is horizontal at its midpoint.
    Generic { radius: Vec<usize> },
    /// Offsets are enumerated on the `driving` axes only (primitive, within
    /// `radius`); the remaining axes are solved from the fields at the
    /// midpoint and snapped to the grid. The edge is kept only if the
    /// snapped displacement is horizontal. Coefficients must not depend on
    /// the completed axes.
    Completion { driving: Vec<usize>, radius: Vec<usize> },
}

impl StencilSpec {
    pub fn generic(dim: usize, r: usize) -> Self {
        StencilSpec::Generic { radius: vec![r; dim] }
    }

    pub fn radius(&self) -> &[usize] {
        match self {
            StencilSpec::Generic { radius } | StencilSpec::Completion { radius, .. } => radius,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Nonzero integer vectors with `|o_a| ≤ r_a` and coprime entries.
pub fn primitive_offsets(radius: &[usize]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; radius.len()];
    fn rec(a: usize, radius: &[usize], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if a == radius.len() {
            let g = cur.iter().fold(0u64, |g, &x| gcd(g, x.unsigned_abs()));
            if g == 1 {
                out.push(cur.clone());
            }
            return;
        }
        let r = radius[a] as i64;
        for x in -r..=r {
            cur[a] = x;
            rec(a + 1, radius, cur, out);
        }
    }
    rec(0, radius, &mut cur, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct StencilGraph {
    grid: Grid,
    spec: StencilSpec,
    /// Full offsets per stencil entry (completed components filled per
    /// table cell in completion mode).
    base: Vec<Vec<i64>>,
    completed: Vec<usize>,
    rel_axes: Vec<usize>,
    rel_counts: Vec<usize>,
    /// `cost[k * R + rel]`, `∞` when the edge does not exist.
    cost: Vec<f64>,
    /// Completed offsets, `completed.len()` per table cell.
    fill: Vec<i64>,
}

impl StencilGraph {
    pub fn new(s: &SRStructure, g: &Grid, spec: StencilSpec, eta: f64) -> Result<Self, SrError> {
        let n = g.dim();
        if s.dim() != n {
            return Err(SrError::DimensionMismatch { expected: n, got: s.dim() });
        }
        let metric = ControlMetric::new(s);
        let (base, completed, driving) = match &spec {
            StencilSpec::Generic { radius } => {
                if radius.len() != n || radius.iter().all(|&r| r == 0) {
                    return Err(SrError::InvalidStencil(format!("radius {radius:?} for dimension {n}")));
                }
                (primitive_offsets(radius), Vec::new(), (0..n).collect::<Vec<_>>())
            }
            StencilSpec::Completion { driving, radius } => {
                if driving.is_empty() || radius.len() != driving.len() || driving.iter().any(|&a| a >= n) {
                    return Err(SrError::InvalidStencil(format!("driving axes {driving:?}, radius {radius:?}")));
                }
                let completed: Vec<usize> = (0..n).filter(|a| !driving.contains(a)).collect();
                if let Some(&a) = completed.iter().find(|&&a| !metric.independent_of(a)) {
                    return Err(SrError::InvalidStencil(format!("coefficients depend on completed axis {a}")));
                }
                let base = primitive_offsets(radius)
                    .into_iter()
                    .map(|od| {
                        let mut o = vec![0i64; n];
                        for (k, &a) in driving.iter().enumerate() {
                            o[a] = od[k];
                        }
                        o
                    })
                    .collect();
                (base, completed, driving.clone())
            }
        };
        let rel_axes: Vec<usize> = (0..n).filter(|&a| !metric.independent_of(a)).collect();
        let rel_counts: Vec<usize> = rel_axes.iter().map(|&a| g.axis(a).count).collect();
        let r_total: usize = rel_counts.iter().product();
        let mut cost = vec![f64::INFINITY; base.len() * r_total];
        let mut fill = vec![0i64; base.len() * r_total * completed.len()];
        let hs: Vec<f64> = g.axes().iter().map(|a| a.h).collect();
        let mut q = vec![0.0; n];
        let mut v = vec![0.0; n];
        for rel in 0..r_total {
            // coordinates on the relevant axes; others are irrelevant
            let mut r = rel;
            let mut ri = vec![0usize; rel_axes.len()];
            for k in (0..rel_axes.len()).rev() {
                ri[k] = r % rel_counts[k];
                r /= rel_counts[k];
            }
            for (k, o) in base.iter().enumerate() {
                q.iter_mut().for_each(|x| *x = 0.0);
                for (t, &a) in rel_axes.iter().enumerate() {
                    q[a] = g.axis(a).coord(ri[t]);
                }
                for a in 0..n {
                    q[a] += o[a] as f64 * hs[a] / 2.0;
                    v[a] = o[a] as f64 * hs[a];
                }
                let cell = k * r_total + rel;
                if !completed.is_empty() {
                    let f = metric.frame(&q);
                    let fd = f.select_rows(driving.iter());
                    let vd: Vec<f64> = driving.iter().map(|&a| v[a]).collect();
                    let Some(u) = min_norm_solve(&fd, &vd, eta) else { continue };
                    let fc = f.select_rows(completed.iter());
                    let dc = fc * u;
                    let mut ok = true;
                    for (t, &a) in completed.iter().enumerate() {
                        let kc = (dc[t] / hs[a]).round();
                        let lim = match g.axis(a).boundary {
                            Boundary::Periodic => (g.axis(a).count / 2) as f64,
                            Boundary::Dirichlet => g.axis(a).count as f64,
                        };
                        if !kc.is_finite() || kc.abs() > lim {
                            ok = false;
                            break;
                        }
                        fill[cell * completed.len() + t] = kc as i64;
                        v[a] = kc * hs[a];
                    }
                    if !ok {
                        continue;
                    }
                }
                let c = metric.cost(&q, &v, eta);
                if c.is_finite() {
                    cost[cell] = c.sqrt();
                }
            }
        }
        Ok(StencilGraph { grid: g.clone(), spec, base, completed, rel_axes, rel_counts, cost, fill })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &StencilSpec {
        &self.spec
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    fn rel_index(&self, m: &[usize]) -> usize {
        self.rel_axes.iter().zip(&self.rel_counts).fold(0, |acc, (&a, &c)| acc * c + m[a])
    }

    /// Calls `f(neighbour, cost)` for every edge out of `node`.
    pub fn for_each_edge(&self, node: usize, m: &mut Vec<usize>, mut f: impl FnMut(usize, f64)) {
        let g = &self.grid;
        *m = g.node_multi(node);
        let r_total: usize = self.rel_counts.iter().product();
        let rel = self.rel_index(m);
        let nc = self.completed.len();
        let mut off = vec![0i64; g.dim()];
        for (k, o) in self.base.iter().enumerate() {
            let cell = k * r_total + rel;
            let c = self.cost[cell];
            if !c.is_finite() {
                continue;
            }
            off.copy_from_slice(o);
            for (t, &a) in self.completed.iter().enumerate() {
                off[a] = self.fill[cell * nc + t];
            }
            if let Some(q) = g.offset_node(m, &off) {
                if q != node {
                    f(q, c);
                }
            }
        }
    }

    /// Dijkstra from weighted seeds into `dist`, only lowering entries.
    /// Nodes farther than `cutoff` are left untouched. Ties pop in node
    /// order, so results are deterministic.
    pub fn relax_from(&self, dist: &mut [f64], seeds: &[(usize, f64)], cutoff: f64) {
        let mut heap = BinaryHeap::new();
        for &(s, d0) in seeds {
            if d0 < dist[s] && d0 <= cutoff {
                dist[s] = d0;
                heap.push(Entry(d0, s));
            }
        }
        let mut m = Vec::new();
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            self.for_each_edge(u, &mut m, |v, c| {
                let nd = d + c;
                if nd < dist[v] && nd <= cutoff {
                    dist[v] = nd;
                    heap.push(Entry(nd, v));
                }
            });
        }
    }

    pub fn distances(&self, seeds: &[(usize, f64)], cutoff: f64) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n_nodes()];
        self.relax_from(&mut dist, seeds, cutoff);
        dist
    }
}

/// Min-heap entry ordered by distance, then node index.
#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sources of a distance map.
#[derive(Clone, Debug, PartialEq)]
pub enum Sources {
    Nodes(Vec<usize>),
    /// Seeds with initial distances, e.g. nodal-cell midpoints reached by
    /// half edges.
    Weighted(Vec<(usize, f64)>),
}

impl Sources {
    pub fn seeds(&self) -> Vec<(usize, f64)> {
        match self {
            Sources::Nodes(v) => v.iter().map(|&n| (n, 0.0)).collect(),
            Sources::Weighted(v) => v.clone(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Sources::Nodes(v) if v.len() == 1 => format!("node {}", v[0]),
            Sources::Nodes(v) => format!("{} nodes", v.len()),
            Sources::Weighted(v) => format!("{} weighted seeds", v.len()),
        }
    }
}

/// Per-node Carnot–Carathéodory distance estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub values: Vec<f64>,
    pub sources: String,
    pub radius: Vec<usize>,
    /// Nodes not reached (infinite distance); nonempty means the stencil
    /// graph is disconnected.
    pub unreachable: usize,
}

impl DistanceField {
    pub fn ensure_connected(&self) -> Result<(), SrError> {
        if self.unreachable > 0 {
            Err(SrError::Unreachable { count: self.unreachable })
        } else {
            Ok(())
        }
    }

    /// Header (sources, radius), then one value per node in row-major order.
    pub fn write_dump(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "# sources {} radius {:?} unreachable {}", self.sources, self.radius, self.unreachable)?;
        for v in &self.values {
            writeln!(w, "{v:?}")?;
        }
        Ok(())
    }
}

pub fn sr_distance_map(
    s: &SRStructure,
    g: &Grid,
    sources: &Sources,
    spec: StencilSpec,
    eta: f64,
) -> Result<DistanceField, SrError> {
    let graph = StencilGraph::new(s, g, spec, eta)?;
    distance_field(&graph, sources)
}

pub fn distance_field(graph: &StencilGraph, sources: &Sources) -> Result<DistanceField, SrError> {
    let seeds = sources.seeds();
    if seeds.is_empty() {
        return Err(SrError::EmptySources);
    }
    if let Some(&(s, _)) = seeds.iter().find(|(s, _)| *s >= graph.n_nodes()) {
        return Err(SrError::DimensionMismatch { expected: graph.n_nodes(), got: s });
    }
    let values = graph.distances(&seeds, f64::INFINITY);
    let unreachable = values.iter().filter(|v| v.is_infinite()).count();
    Ok(DistanceField { values, sources: sources.describe(), radius: graph.spec().radius().to_vec(), unreachable })
}
