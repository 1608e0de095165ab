//! Graphs, colorings, and neighboring coloring pairs.
//!
//! Vertices are `0..n`; colors are `1..=k`. Colorings are dense vectors and
//! need not be proper: improper labelings are first-class states.

use std::collections::BTreeSet;
use std::fmt;

use crate::{Error, Result};

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are normalized and
    /// deduplicated; self-loops and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Domain(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Domain(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Graph {
            n,
            edges,
            adj,
            max_degree,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }
}

/// Parses the text format: a `n <count>` header line, then one `u v` pair
/// per line. Blank lines and `#` comments are skipped. Duplicate edges are
/// deduplicated; self-loops are errors. Errors carry 1-based line numbers.
pub fn load_graph(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match n {
            None => {
                let tag = parts.next();
                let count = parts.next();
                let extra = parts.next();
                let (Some("n"), Some(count), None) = (tag, count, extra) else {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `n <count>`, found {line:?}"),
                    });
                };
                let count: usize = count.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad vertex count {count:?}"),
                })?;
                n = Some(count);
            }
            Some(count) => {
                let u = parts.next();
                let v = parts.next();
                let extra = parts.next();
                let (Some(u), Some(v), None) = (u, v, extra) else {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected edge `u v`, found {line:?}"),
                    });
                };
                let parse = |s: &str| -> Result<usize> {
                    s.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad vertex id {s:?}"),
                    })
                };
                let (u, v) = (parse(u)?, parse(v)?);
                if u == v {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("self-loop at vertex {u}"),
                    });
                }
                if u >= count || v >= count {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("edge ({u}, {v}) out of range for n = {count}"),
                    });
                }
                edges.push((u, v));
            }
        }
    }
    let Some(n) = n else {
        return Err(Error::Parse {
            line: 1,
            message: "missing `n <count>` header".to_string(),
        });
    };
    Graph::new(n, edges)
}

/// Color assignment over `1..=k`. Not necessarily proper.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coloring {
    colors: Vec<u32>,
    k: u32,
}

impl Coloring {
    pub fn new(colors: Vec<u32>, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidColoring("palette size k = 0".to_string()));
        }
        if let Some((v, &c)) = colors.iter().enumerate().find(|(_, &c)| c < 1 || c > k) {
            return Err(Error::InvalidColoring(format!(
                "vertex {v} has color {c}, palette is 1..={k}"
            )));
        }
        Ok(Coloring { colors, k })
    }

    /// Parses a comma-separated color list.
    pub fn parse(s: &str, k: u32) -> Result<Self> {
        let colors = s
            .split(',')
            .map(|t| {
                t.trim().parse::<u32>().map_err(|_| {
                    Error::InvalidColoring(format!("bad color entry {:?}", t.trim()))
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        Coloring::new(colors, k)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn set(&mut self, v: usize, c: u32) -> Result<()> {
        if c < 1 || c > self.k {
            return Err(Error::InvalidColoring(format!(
                "color {c} outside palette 1..={}",
                self.k
            )));
        }
        self.colors[v] = c;
        Ok(())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.colors
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.colors {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// Number of disagreeing vertices. Panics on length mismatch.
pub fn hamming(x: &Coloring, y: &Coloring) -> usize {
    assert_eq!(x.len(), y.len(), "colorings over different vertex sets");
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .filter(|(a, b)| a != b)
        .count()
}

/// True when no edge is monochromatic.
pub fn is_proper(g: &Graph, x: &Coloring) -> Result<bool> {
    if x.len() != g.n() {
        return Err(Error::InvalidColoring(format!(
            "coloring has {} entries, graph has {} vertices",
            x.len(),
            g.n()
        )));
    }
    Ok(g.edges().iter().all(|&(u, v)| x.get(u) != x.get(v)))
}

/// A pair of colorings differing at exactly one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighboringPair {
    x: Coloring,
    y: Coloring,
    vstar: usize,
}

impl NeighboringPair {
    pub fn new(x: Coloring, y: Coloring) -> Result<Self> {
        if x.len() != y.len() || x.k() != y.k() {
            return Err(Error::Domain(
                "pair must share vertex set and palette".to_string(),
            ));
        }
        let disagreements: Vec<usize> = (0..x.len()).filter(|&v| x.get(v) != y.get(v)).collect();
        match disagreements.as_slice() {
            [v] => Ok(NeighboringPair { x, y, vstar: *v }),
            _ => Err(Error::Domain(format!(
                "pair differs at {} vertices, expected exactly 1",
                disagreements.len()
            ))),
        }
    }

    /// Builds the pair (x, x[vstar := cy]).
    pub fn from_base(x: Coloring, vstar: usize, cy: u32) -> Result<Self> {
        if vstar >= x.len() {
            return Err(Error::Domain(format!("vertex {vstar} out of range")));
        }
        if cy == x.get(vstar) {
            return Err(Error::Domain(
                "recoloring must change the color at vstar".to_string(),
            ));
        }
        let mut y = x.clone();
        y.set(vstar, cy)?;
        NeighboringPair::new(x, y)
    }

    pub fn x(&self) -> &Coloring {
        &self.x
    }

    pub fn y(&self) -> &Coloring {
        &self.y
    }

    pub fn vstar(&self) -> usize {
        self.vstar
    }

    /// (X(vstar), Y(vstar)).
    pub fn endpoint_colors(&self) -> (u32, u32) {
        (self.x.get(self.vstar), self.y.get(self.vstar))
    }
}

const ENUMERATION_BUDGET: u128 = 10_000_000;

fn check_budget(n: usize, k: u32) -> Result<()> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(k as u128);
        if total > ENUMERATION_BUDGET {
            return Err(Error::Budget {
                required: total,
                budget: ENUMERATION_BUDGET,
            });
        }
    }
    Ok(())
}

/// All proper colorings in lexicographic order. Refuses when k^n exceeds
/// the enumeration budget of 10^7.
pub fn enumerate_proper_colorings(g: &Graph, k: u32) -> Result<Vec<Coloring>> {
    check_budget(g.n(), k)?;
    if k == 0 {
        return Err(Error::InvalidColoring("palette size k = 0".to_string()));
    }
    let n = g.n();
    let mut out = Vec::new();
    let mut partial: Vec<u32> = Vec::with_capacity(n);
    fn rec(g: &Graph, k: u32, partial: &mut Vec<u32>, out: &mut Vec<Coloring>) {
        let v = partial.len();
        if v == g.n() {
            out.push(Coloring {
                colors: partial.clone(),
                k,
            });
            return;
        }
        'colors: for c in 1..=k {
            for &u in g.neighbors(v) {
                if u < v && partial[u] == c {
                    continue 'colors;
                }
            }
            partial.push(c);
            rec(g, k, partial, out);
            partial.pop();
        }
    }
    rec(g, k, &mut partial, &mut out);
    Ok(out)
}

/// All k^n labelings (proper or not) in lexicographic order, same budget.
pub fn enumerate_all_labelings(n: usize, k: u32) -> Result<Vec<Coloring>> {
    check_budget(n, k)?;
    if k == 0 {
        return Err(Error::InvalidColoring("palette size k = 0".to_string()));
    }
    let mut out = Vec::new();
    let mut current = vec![1u32; n];
    loop {
        out.push(Coloring {
            colors: current.clone(),
            k,
        });
        let mut pos = n;
        while pos > 0 {
            if current[pos - 1] < k {
                current[pos - 1] += 1;
                for entry in &mut current[pos..] {
                    *entry = 1;
                }
                break;
            }
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
    }
    Ok(out)
}
