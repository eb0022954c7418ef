use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::graph::StencilGraph;
use super::SrError;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BoxCount {
    pub eps: Vec<f64>,
    /// `N(ε)`, `None` where the covering budget ran out first.
    pub counts: Vec<Option<usize>>,
    /// Least-squares slope of `log N` against `log(1/ε)` over the
    /// available counts.
    pub slope: f64,
    /// Covering radius after each greedy centre.
    pub radii: Vec<f64>,
    /// Unreachable cells (infinite distance from every centre).
    pub unreachable: usize,
}

impl BoxCount {
    /// `N(ε) ε^s` per ε.
    pub fn proxy(&self, s: f64) -> Vec<Option<f64>> {
        self.eps.iter().zip(&self.counts).map(|(e, c)| c.map(|c| c as f64 * e.powf(s))).collect()
    }
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return f64::NAN;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Greedy farthest-point covering of `cells` (node indices) by sR balls.
///
/// Each new centre is the cell farthest from all previous centres (lowest
/// index on ties); the covering radius after `k` centres is `r_k`, and
/// `N(ε) = min{k : r_k ≤ ε}`. Distances to the centre set are updated by a
/// Dijkstra pass pruned to nodes that get closer. At most `budget` centres
/// are placed.
pub fn boxcount_dimension(graph: &StencilGraph, cells: &[usize], eps_list: &[f64], budget: usize) -> Result<BoxCount, SrError> {
    if cells.is_empty() {
        return Err(SrError::EmptySources);
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(SrError::InvalidEps(eps_list.to_vec()));
    }
    let eps_min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let mut dist = vec![f64::INFINITY; graph.n_nodes()];
    graph.relax_from(&mut dist, &[(cells[0], 0.0)], f64::INFINITY);
    // Lazy max-heap of (distance, cell): distances only decrease, so a
    // stale top is refreshed and pushed back until the top is current.
    let mut heap: BinaryHeap<(Far, Reverse<usize>)> = cells.iter().map(|&c| (Far(dist[c]), Reverse(c))).collect();
    let mut radii = Vec::new();
    loop {
        let r = loop {
            let Some(&(Far(d), Reverse(c))) = heap.peek() else { break (0.0, None) };
            if d == dist[c] {
                break (d, Some(c));
            }
            heap.pop();
            heap.push((Far(dist[c]), Reverse(c)));
        };
        radii.push(r.0);
        if r.0 <= eps_min || radii.len() >= budget {
            break;
        }
        let far = r.1.expect("nonempty heap");
        graph.relax_from(&mut dist, &[(far, 0.0)], f64::INFINITY);
    }
    let unreachable = cells.iter().filter(|&&c| dist[c].is_infinite()).count();
    let counts: Vec<Option<usize>> = eps_list.iter().map(|&e| radii.iter().position(|&r| r <= e).map(|k| k + 1)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        eps_list.iter().zip(&counts).filter_map(|(e, c)| c.map(|c| ((1.0 / e).ln(), (c as f64).ln()))).unzip();
    let out = BoxCount { eps: eps_list.to_vec(), counts, slope: least_squares_slope(&xs, &ys), radii, unreachable };
    if out.counts.iter().any(|c| c.is_none()) {
        return Err(SrError::BudgetExceeded(Box::new(out)));
    }
    Ok(out)
}

/// Total order on distances, `∞` largest.
#[derive(Clone, Copy, PartialEq)]
struct Far(f64);

impl Eq for Far {}

impl Ord for Far {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for Far {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
