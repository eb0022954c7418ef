use std::fmt::Write as _;
use std::io;

use crate::vf_algebra::AxisDomain;

use super::DiscretizeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Boundary nodes are part of the grid but carry the value zero.
    Dirichlet,
    /// Indices wrap; every node is an unknown.
    Periodic,
}

/// One uniform axis. For Dirichlet axes `count` includes both walls.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub count: usize,
    pub lo: f64,
    pub h: f64,
    pub boundary: Boundary,
}

impl Axis {
    /// `count` nodes from `lo` to `hi`, walls included.
    pub fn dirichlet(lo: f64, hi: f64, count: usize) -> Self {
        Axis { count, lo, h: (hi - lo) / (count as f64 - 1.0), boundary: Boundary::Dirichlet }
    }

    /// `count` nodes at `lo + i·len/count`.
    pub fn periodic(lo: f64, len: f64, count: usize) -> Self {
        Axis { count, lo, h: len / count as f64, boundary: Boundary::Periodic }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }

    pub fn is_wall(&self, i: usize) -> bool {
        self.boundary == Boundary::Dirichlet && (i == 0 || i + 1 == self.count)
    }

    pub fn unknown_count(&self) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.count - 2,
            Boundary::Periodic => self.count,
        }
    }

    /// Neighbour index `i + off`, wrapped on periodic axes.
    pub fn step(&self, i: usize, off: i64) -> Option<usize> {
        let j = i as i64 + off;
        match self.boundary {
            Boundary::Periodic => Some(j.rem_euclid(self.count as i64) as usize),
            Boundary::Dirichlet => (0..self.count as i64).contains(&j).then_some(j as usize),
        }
    }

    pub fn period(&self) -> Option<f64> {
        (self.boundary == Boundary::Periodic).then_some(self.h * self.count as f64)
    }
}

/// Tensor grid, row-major with the first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub id: String,
    axes: Vec<Axis>,
    strides: Vec<usize>,
    ustrides: Vec<usize>,
}

impl Grid {
    pub fn new(id: impl Into<String>, axes: Vec<Axis>) -> Result<Self, DiscretizeError> {
        for (a, ax) in axes.iter().enumerate() {
            if ax.count < 3 || !(ax.h > 0.0) {
                return Err(DiscretizeError::InvalidCount { axis: a, count: ax.count });
            }
        }
        let n = axes.len();
        let mut strides = vec![1; n];
        let mut ustrides = vec![1; n];
        for a in (0..n.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].count;
            ustrides[a] = ustrides[a + 1] * axes[a + 1].unknown_count();
        }
        Ok(Grid { id: id.into(), axes, strides, ustrides })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn n_unknowns(&self) -> usize {
        self.axes.iter().map(|a| a.unknown_count()).product()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn node_multi(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim()];
        for a in 0..self.dim() {
            m[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        m
    }

    pub fn node_index(&self, m: &[usize]) -> usize {
        m.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn node_coords(&self, idx: usize) -> Vec<f64> {
        self.node_multi(idx).iter().zip(&self.axes).map(|(&i, ax)| ax.coord(i)).collect()
    }

    pub fn is_wall_node(&self, idx: usize) -> bool {
        self.node_multi(idx).iter().zip(&self.axes).any(|(&i, ax)| ax.is_wall(i))
    }

    /// Unknown index of a node, `None` on Dirichlet walls.
    pub fn node_to_unknown(&self, idx: usize) -> Option<usize> {
        let m = self.node_multi(idx);
        self.multi_to_unknown(&m)
    }

    pub fn multi_to_unknown(&self, m: &[usize]) -> Option<usize> {
        let mut u = 0;
        for (a, (&i, ax)) in m.iter().zip(&self.axes).enumerate() {
            if ax.is_wall(i) {
                return None;
            }
            let k = match ax.boundary {
                Boundary::Dirichlet => i - 1,
                Boundary::Periodic => i,
            };
            u += k * self.ustrides[a];
        }
        Some(u)
    }

    pub fn unknown_multi(&self, mut u: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim()];
        for (a, ax) in self.axes.iter().enumerate() {
            let k = u / self.ustrides[a];
            u %= self.ustrides[a];
            m[a] = match ax.boundary {
                Boundary::Dirichlet => k + 1,
                Boundary::Periodic => k,
            };
        }
        m
    }

    pub fn unknown_to_node(&self, u: usize) -> usize {
        self.node_index(&self.unknown_multi(u))
    }

    pub fn unknown_coords(&self, u: usize) -> Vec<f64> {
        self.node_coords(self.unknown_to_node(u))
    }

    /// Neighbour of a node along one axis, wrapping periodic axes.
    pub fn neighbor(&self, idx: usize, axis: usize, off: i64) -> Option<usize> {
        let m = self.node_multi(idx);
        let j = self.axes[axis].step(m[axis], off)?;
        Some(idx - m[axis] * self.strides[axis] + j * self.strides[axis])
    }

    /// Neighbour by a multi-axis offset.
    pub fn offset_node(&self, m: &[usize], off: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for (a, ax) in self.axes.iter().enumerate() {
            idx += ax.step(m[a], off[a])? * self.strides[a];
        }
        Some(idx)
    }

    /// Sample a function at every unknown.
    pub fn sample_unknowns(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.n_unknowns()).map(|u| f(&self.unknown_coords(u))).collect()
    }

    /// Axis metadata lines, then one line of coordinates per node.
    pub fn write_dump(&self, w: &mut impl io::Write) -> io::Result<()> {
        let mut head = String::new();
        let _ = writeln!(head, "# grid {} dim {} nodes {} unknowns {}", self.id, self.dim(), self.n_nodes(), self.n_unknowns());
        for (a, ax) in self.axes.iter().enumerate() {
            let kind = match ax.boundary {
                Boundary::Dirichlet => "dirichlet",
                Boundary::Periodic => "periodic",
            };
            let _ = writeln!(head, "# axis {a} {kind} count {} lo {:?} h {:?}", ax.count, ax.lo, ax.h);
        }
        w.write_all(head.as_bytes())?;
        for idx in 0..self.n_nodes() {
            let c: Vec<String> = self.node_coords(idx).iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", c.join(" "))?;
        }
        Ok(())
    }
}

/// Uniform grid over a structure domain. Dirichlet counts include the walls.
pub fn build_grid(domain: &[AxisDomain], counts: &[usize]) -> Result<Grid, DiscretizeError> {
    if domain.len() != counts.len() {
        return Err(DiscretizeError::DimensionMismatch { expected: domain.len(), got: counts.len() });
    }
    let mut axes = Vec::with_capacity(domain.len());
    for (a, (d, &n)) in domain.iter().zip(counts).enumerate() {
        if n < 3 {
            return Err(DiscretizeError::InvalidCount { axis: a, count: n });
        }
        axes.push(match d {
            AxisDomain::Dirichlet { lo, hi } => Axis::dirichlet(*lo, *hi, n),
            AxisDomain::Periodic { len } => Axis::periodic(0.0, *len, n),
            AxisDomain::Twisted { .. } => return Err(DiscretizeError::UnsupportedTwist { axis: a }),
        });
    }
    let id = counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x");
    Grid::new(id, axes)
}
