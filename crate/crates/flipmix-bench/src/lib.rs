//! Deterministic graph and coloring builders shared by the benchmarks.

use flipmix_core::{Coloring, Graph};

pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
}

/// Complete binary tree on n vertices: children of i are 2i+1 and 2i+2.
pub fn binary_tree(n: usize) -> Graph {
    let edges = (1..n).map(|c| ((c - 1) / 2, c));
    Graph::new(n, edges).unwrap()
}

/// Proper coloring that cycles through `period` colors along the index
/// order; valid for paths (period >= 2) and for cycles when period
/// divides n.
pub fn striped(n: usize, period: u32, k: u32) -> Coloring {
    let colors = (0..n).map(|i| (i as u32 % period) + 1).collect();
    Coloring::new(colors, k).unwrap()
}

/// Colors a binary tree by depth mod 3: parent and child always differ.
pub fn depth_colored(n: usize, k: u32) -> Coloring {
    let colors = (0..n)
        .map(|i| (usize::BITS - (i + 1).leading_zeros() - 1) % 3 + 1)
        .collect();
    Coloring::new(colors, k).unwrap()
}
