//! Alternating-color clusters and cluster flips.
//!
//! The cluster of (v, c) in coloring x is the maximal set reachable from v
//! along paths that alternate between x(v) and c, read off the coloring
//! directly (so the definition also covers improper colorings). Flipping a
//! cluster interchanges its two colors on every member.

use crate::graph::{Coloring, Graph};
use crate::{Error, Result};

/// Callers that only need the flip probability can stop BFS at this size:
/// supported schedules vanish from size 7 up.
pub const DEFAULT_SIZE_CUTOFF: usize = 8;

/// Maximal (color_from, color_to)-alternating set reachable from `origin`.
/// Empty when color_to = color_from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cluster {
    origin: usize,
    color_from: u32,
    color_to: u32,
    members: Vec<usize>,
}

impl Cluster {
    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn color_from(&self) -> u32 {
        self.color_from
    }

    pub fn color_to(&self) -> u32 {
        self.color_to
    }

    /// Sorted member list.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Unordered color pair, normalized (min, max).
    pub fn color_pair(&self) -> (u32, u32) {
        let (a, b) = (self.color_from, self.color_to);
        (a.min(b), a.max(b))
    }

    /// Identity key: member set plus unordered color pair.
    pub fn key(&self) -> (Vec<usize>, (u32, u32)) {
        (self.members.clone(), self.color_pair())
    }
}

fn bfs(g: &Graph, x: &Coloring, v: usize, c: u32, cutoff: Option<usize>) -> Option<Cluster> {
    let from = x.get(v);
    if from == c {
        return Some(Cluster {
            origin: v,
            color_from: from,
            color_to: c,
            members: Vec::new(),
        });
    }
    let mut visited = vec![false; g.n()];
    let mut queue = std::collections::VecDeque::new();
    let mut members = Vec::new();
    visited[v] = true;
    queue.push_back(v);
    members.push(v);
    while let Some(w) = queue.pop_front() {
        let want = if x.get(w) == from { c } else { from };
        for &u in g.neighbors(w) {
            if !visited[u] && x.get(u) == want {
                visited[u] = true;
                members.push(u);
                if let Some(cap) = cutoff {
                    if members.len() > cap {
                        return None;
                    }
                }
                queue.push_back(u);
            }
        }
    }
    members.sort_unstable();
    Some(Cluster {
        origin: v,
        color_from: from,
        color_to: c,
        members,
    })
}

/// Full cluster of (v, c) in x.
pub fn cluster(g: &Graph, x: &Coloring, v: usize, c: u32) -> Cluster {
    bfs(g, x, v, c, None).expect("uncapped BFS always completes")
}

/// Cluster of (v, c), abandoning the BFS once more than `cutoff` members
/// are found. `None` means the true size exceeds `cutoff`.
pub fn cluster_bounded(
    g: &Graph,
    x: &Coloring,
    v: usize,
    c: u32,
    cutoff: usize,
) -> Option<Cluster> {
    bfs(g, x, v, c, Some(cutoff))
}

/// Interchanges the cluster's two colors on its members. Fails with a stale
/// cluster error if any member no longer wears one of the two colors.
pub fn flip(x: &Coloring, s: &Cluster) -> Result<Coloring> {
    let mut out = x.clone();
    if s.is_empty() {
        return Ok(out);
    }
    let (from, to) = (s.color_from(), s.color_to());
    for &w in s.members() {
        if w >= x.len() {
            return Err(Error::Domain(format!("cluster member {w} out of range")));
        }
        let found = x.get(w);
        let next = if found == from {
            to
        } else if found == to {
            from
        } else {
            return Err(Error::StaleCluster {
                vertex: w,
                found,
                expected_from: from,
                expected_to: to,
            });
        };
        out.set(w, next)?;
    }
    Ok(out)
}

/// Clusters of every move (v, c) with c != x(v): exactly n(k-1) entries.
pub fn all_clusters(g: &Graph, x: &Coloring) -> Vec<Cluster> {
    let mut out = Vec::with_capacity(g.n() * (x.k() as usize - 1));
    for v in 0..g.n() {
        for c in 1..=x.k() {
            if c != x.get(v) {
                out.push(cluster(g, x, v, c));
            }
        }
    }
    out
}
