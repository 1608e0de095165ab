//! Blocking counts around the disagreement vertex, the weighted Hamming
//! metric they induce, and color-neighborhood statistics.
//!
//! A neighbor u of the disagreement vertex z is blocked by every other
//! neighbor w of u wearing X(z) or Y(z) in either coloring. For pairs
//! differing at many vertices this is the two-set test
//! {X(w), Y(w)} cap {X(z), Y(z)} != empty; it collapses to the one-color
//! test off the single disagreement of a neighboring pair, and it is the
//! form under which the interpolation sum dominates the path metric.
//! Unblocked neighbors (zero blockers) drive the metric discount; F(z) is
//! empty once X(z) = Y(z).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_traits::Zero;

use crate::graph::{Coloring, Graph, NeighboringPair};
use crate::rational::{rat, Rat};
use crate::schedule::FlipSchedule;
use crate::{Error, Result};

/// Blocking counts for every neighbor of the disagreement vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockProfile {
    pub vstar: usize,
    /// (neighbor, blocker count), sorted by neighbor id.
    pub per_neighbor: Vec<(usize, usize)>,
    pub d0: usize,
    pub d1: usize,
    pub d2plus: usize,
}

/// Number of blockers of `u` with respect to the pair's disagreement
/// vertex. Errors unless `u` is a neighbor of that vertex.
pub fn blocking_count(g: &Graph, pair: &NeighboringPair, u: usize) -> Result<usize> {
    let z = pair.vstar();
    if !g.neighbors(z).contains(&u) {
        return Err(Error::Domain(format!(
            "vertex {u} is not a neighbor of the disagreement vertex {z}"
        )));
    }
    Ok(blockers_general(g, pair.x(), pair.y(), z, u))
}

fn blockers_general(g: &Graph, x: &Coloring, y: &Coloring, z: usize, u: usize) -> usize {
    let (cx, cy) = (x.get(z), y.get(z));
    g.neighbors(u)
        .iter()
        .filter(|&&w| {
            w != z && {
                let (xw, yw) = (x.get(w), y.get(w));
                xw == cx || xw == cy || yw == cx || yw == cy
            }
        })
        .count()
}

/// Unblocked neighbors of `z` for an arbitrary pair; empty when the pair
/// agrees at `z`.
pub fn unblocked_neighbors(g: &Graph, x: &Coloring, y: &Coloring, z: usize) -> Vec<usize> {
    if x.get(z) == y.get(z) {
        return Vec::new();
    }
    g.neighbors(z)
        .iter()
        .copied()
        .filter(|&u| blockers_general(g, x, y, z, u) == 0)
        .collect()
}

/// d^0(z) for an arbitrary pair.
pub fn unblocked_count_general(g: &Graph, x: &Coloring, y: &Coloring, z: usize) -> usize {
    unblocked_neighbors(g, x, y, z).len()
}

/// Blocking profile of a neighboring pair at its disagreement vertex.
pub fn classify(g: &Graph, pair: &NeighboringPair) -> BlockProfile {
    let z = pair.vstar();
    let per_neighbor: Vec<(usize, usize)> = g
        .neighbors(z)
        .iter()
        .map(|&u| (u, blockers_general(g, pair.x(), pair.y(), z, u)))
        .collect();
    let d0 = per_neighbor.iter().filter(|(_, b)| *b == 0).count();
    let d1 = per_neighbor.iter().filter(|(_, b)| *b == 1).count();
    let d2plus = per_neighbor.iter().filter(|(_, b)| *b >= 2).count();
    BlockProfile {
        vstar: z,
        per_neighbor,
        d0,
        d1,
        d2plus,
    }
}

/// Metric weight of a neighboring pair: 1 - (eta / Delta) d^0, with Delta
/// the graph maximum degree. Always inside [1 - eta, 1].
pub fn metric_neighboring(g: &Graph, pair: &NeighboringPair, s: &FlipSchedule) -> Rat {
    let d0 = classify(g, pair).d0;
    weight_from_d0(d0, g.max_degree(), s)
}

fn weight_from_d0(d0: usize, max_degree: usize, s: &FlipSchedule) -> Rat {
    if d0 == 0 {
        return rat(1, 1);
    }
    rat(1, 1) - s.eta() * rat(d0 as i64, 1) / rat(max_degree as i64, 1)
}

/// Sum of per-disagreement weights: an upper bound on the path metric,
/// exact at Hamming distance <= 1.
pub fn metric_upper_bound(g: &Graph, x: &Coloring, y: &Coloring, s: &FlipSchedule) -> Result<Rat> {
    if x.len() != g.n() || y.len() != g.n() || x.k() != y.k() {
        return Err(Error::Domain(
            "pair must live on the graph's vertex set with one palette".to_string(),
        ));
    }
    let mut total = Rat::zero();
    for z in 0..g.n() {
        if x.get(z) != y.get(z) {
            let d0 = unblocked_count_general(g, x, y, z);
            total += weight_from_d0(d0, g.max_degree(), s);
        }
    }
    Ok(total)
}

/// Shortest-path metric on the given state space, edges between colorings
/// at Hamming distance 1 weighted by `metric_neighboring`. Symmetric in
/// (x, y). Refuses when states * moves exceeds the exploration budget.
pub fn exact_path_metric(
    g: &Graph,
    x: &Coloring,
    y: &Coloring,
    s: &FlipSchedule,
    states: &[Coloring],
) -> Result<Rat> {
    const BUDGET: u128 = 10_000_000;
    if states.is_empty() {
        return Err(Error::Config("empty state list".to_string()));
    }
    let k = states[0].k() as u128;
    let cost = states.len() as u128 * states[0].len() as u128 * k;
    if cost > BUDGET {
        return Err(Error::Budget {
            required: cost,
            budget: BUDGET,
        });
    }
    let mut index: HashMap<&[u32], usize> = HashMap::with_capacity(states.len());
    for (i, state) in states.iter().enumerate() {
        index.insert(state.as_slice(), i);
    }
    let (Some(&src), Some(&dst)) = (index.get(x.as_slice()), index.get(y.as_slice())) else {
        return Err(Error::Domain(
            "both endpoints must belong to the state list".to_string(),
        ));
    };
    if src == dst {
        return Ok(Rat::zero());
    }
    let mut dist: Vec<Option<Rat>> = vec![None; states.len()];
    let mut heap: BinaryHeap<Reverse<(Rat, usize)>> = BinaryHeap::new();
    dist[src] = Some(Rat::zero());
    heap.push(Reverse((Rat::zero(), src)));
    while let Some(Reverse((d, i))) = heap.pop() {
        if dist[i].as_ref() != Some(&d) {
            continue;
        }
        if i == dst {
            return Ok(d);
        }
        let state = &states[i];
        let mut scratch = state.clone();
        for v in 0..state.len() {
            let original = state.get(v);
            for c in 1..=state.k() {
                if c == original {
                    continue;
                }
                scratch.set(v, c)?;
                if let Some(&j) = index.get(scratch.as_slice()) {
                    let pair = NeighboringPair::new(state.clone(), states[j].clone())
                        .expect("hamming-1 by construction");
                    let w = metric_neighboring(g, &pair, s);
                    let candidate = &d + &w;
                    if dist[j].as_ref().map(|cur| candidate < *cur).unwrap_or(true) {
                        dist[j] = Some(candidate.clone());
                        heap.push(Reverse((candidate, j)));
                    }
                }
            }
            scratch.set(v, original)?;
        }
    }
    Err(Error::Domain(
        "no path between the endpoints in the given state space".to_string(),
    ))
}

/// Colors around the disagreement vertex: per-color neighbor sets,
/// multiplicity classes, and the available-color set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorNeighborhood {
    /// (color, neighbors wearing it), for every palette color, sorted.
    pub per_color: Vec<(u32, Vec<usize>)>,
    /// Neighbors whose color appears exactly once in the neighborhood.
    pub delta1: usize,
    /// Neighbors whose color appears exactly twice.
    pub delta2: usize,
    /// Neighbors whose color appears three or more times.
    pub delta3plus: usize,
    /// Colors absent from the neighborhood, sorted.
    pub available: Vec<u32>,
    pub degree: usize,
}

impl ColorNeighborhood {
    pub fn neighbors_of_color(&self, c: u32) -> &[usize] {
        &self.per_color[(c - 1) as usize].1
    }

    pub fn count(&self, c: u32) -> usize {
        self.neighbors_of_color(c).len()
    }
}

/// Neighborhood statistics at the pair's disagreement vertex (colors taken
/// from the shared off-vertex coloring).
pub fn color_neighborhood(g: &Graph, pair: &NeighboringPair) -> ColorNeighborhood {
    let z = pair.vstar();
    let x = pair.x();
    let k = x.k();
    let mut per_color: Vec<(u32, Vec<usize>)> = (1..=k).map(|c| (c, Vec::new())).collect();
    for &u in g.neighbors(z) {
        per_color[(x.get(u) - 1) as usize].1.push(u);
    }
    let mut delta1 = 0;
    let mut delta2 = 0;
    let mut delta3plus = 0;
    for (_, members) in &per_color {
        match members.len() {
            0 => {}
            1 => delta1 += 1,
            2 => delta2 += 2,
            m => delta3plus += m,
        }
    }
    let available = per_color
        .iter()
        .filter(|(_, members)| members.is_empty())
        .map(|(c, _)| *c)
        .collect();
    ColorNeighborhood {
        per_color,
        delta1,
        delta2,
        delta3plus,
        available,
        degree: g.degree(z),
    }
}

/// True when `inner`'s unblocked set is contained in `outer`'s for the same
/// vertex: the containment that makes the summed metric an upper bound.
pub fn unblocked_subset(
    g: &Graph,
    inner: (&Coloring, &Coloring),
    outer: (&Coloring, &Coloring),
    z: usize,
) -> bool {
    let inner_set = unblocked_neighbors(g, inner.0, inner.1, z);
    let outer_set = unblocked_neighbors(g, outer.0, outer.1, z);
    inner_set.iter().all(|u| outer_set.contains(u))
}

/// Interpolation path x = r_0, r_1, ..., r_m = y recoloring disagreement
/// vertices one at a time in vertex order.
pub fn interpolation_path(x: &Coloring, y: &Coloring) -> Vec<Coloring> {
    assert_eq!(x.len(), y.len());
    let mut path = vec![x.clone()];
    let mut current = x.clone();
    for v in 0..x.len() {
        if current.get(v) != y.get(v) {
            current.set(v, y.get(v)).expect("palette color");
            path.push(current.clone());
        }
    }
    path
}
