//! Graph constructions for experiments.
//!
//! These are experiment conveniences; the core library stays free of RNG.
//! A graph argument is either a generator spec (`path:8`, `cycle:5`,
//! `star:6`, `tree:50`, `tree:50:5`, `regular:20:3`) or a path to an
//! edge-list file.

use anyhow::{bail, Context, Result};
use flipmix_core::{load_graph, Graph};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BinaryHeap, HashSet};
use std::cmp::Reverse;

/// Rejection-sampling cap shared by the degree-capped tree and the
/// simple-graph configuration model.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub enum GraphSpec {
    Path(usize),
    Cycle(usize),
    Star(usize),
    /// Uniform labelled tree via Pruefer decoding; with a cap, rejection
    /// sampling conditions on maximum degree, staying uniform over the
    /// degree-bounded trees.
    Tree(usize, Option<usize>),
    /// Random d-regular graph via the configuration model, rejecting
    /// pairings with loops or parallel edges.
    Regular(usize, usize),
    File(String),
}

impl GraphSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let arg = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .with_context(|| format!("generator `{}` is missing argument {i}", parts[0]))?
                .parse::<usize>()
                .with_context(|| format!("bad number in graph spec `{text}`"))
        };
        let arity = |want: usize| -> Result<()> {
            if parts.len() != want {
                bail!(
                    "graph spec `{text}` has {} fields, expected {want}",
                    parts.len()
                );
            }
            Ok(())
        };
        match parts[0] {
            "path" => {
                arity(2)?;
                Ok(GraphSpec::Path(arg(1)?))
            }
            "cycle" => {
                arity(2)?;
                Ok(GraphSpec::Cycle(arg(1)?))
            }
            "star" => {
                arity(2)?;
                Ok(GraphSpec::Star(arg(1)?))
            }
            "tree" => {
                if parts.len() == 2 {
                    Ok(GraphSpec::Tree(arg(1)?, None))
                } else {
                    arity(3)?;
                    Ok(GraphSpec::Tree(arg(1)?, Some(arg(2)?)))
                }
            }
            "regular" => {
                arity(3)?;
                Ok(GraphSpec::Regular(arg(1)?, arg(2)?))
            }
            _ => Ok(GraphSpec::File(text.to_string())),
        }
    }

    /// True when building draws from the RNG, so each trial should get a
    /// fresh graph from its own stream.
    pub fn is_random(&self) -> bool {
        matches!(self, GraphSpec::Tree(..) | GraphSpec::Regular(..))
    }

    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        match self {
            GraphSpec::Path(n) => path_graph(*n),
            GraphSpec::Cycle(n) => cycle_graph(*n),
            GraphSpec::Star(n) => star_graph(*n),
            GraphSpec::Tree(n, cap) => random_tree(*n, *cap, rng),
            GraphSpec::Regular(n, d) => random_regular(*n, *d, rng),
            GraphSpec::File(p) => {
                let text =
                    std::fs::read_to_string(p).with_context(|| format!("reading graph {p}"))?;
                Ok(load_graph(&text)?)
            }
        }
    }
}

pub fn path_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        bail!("path graph needs at least 1 vertex");
    }
    Ok(Graph::new(n, (1..n).map(|v| (v - 1, v)))?)
}

pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        bail!("cycle graph needs at least 3 vertices");
    }
    Ok(Graph::new(n, (0..n).map(|v| (v, (v + 1) % n)))?)
}

/// Star on `n` vertices: vertex 0 is the hub.
pub fn star_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        bail!("star graph needs at least 1 vertex");
    }
    Ok(Graph::new(n, (1..n).map(|v| (0, v)))?)
}

/// Uniform labelled tree on `n` vertices, decoded from a uniform Pruefer
/// sequence. With `max_degree`, trees violating the cap are rejected and
/// redrawn, so the output is uniform over trees obeying the cap.
pub fn random_tree<R: Rng + ?Sized>(
    n: usize,
    max_degree: Option<usize>,
    rng: &mut R,
) -> Result<Graph> {
    if n == 0 {
        bail!("tree needs at least 1 vertex");
    }
    if let Some(cap) = max_degree {
        let needed = if n <= 2 { n - 1 } else { 2 };
        if cap < needed {
            bail!("no tree on {n} vertices has maximum degree <= {cap}");
        }
    }
    for _ in 0..MAX_REJECTIONS {
        let g = pruefer_tree(n, rng)?;
        match max_degree {
            Some(cap) if g.max_degree() > cap => continue,
            _ => return Ok(g),
        }
    }
    bail!(
        "degree cap {} rejected {MAX_REJECTIONS} consecutive trees on {n} vertices",
        max_degree.unwrap_or(0)
    )
}

fn pruefer_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Graph> {
    if n == 1 {
        return Ok(Graph::new(1, [])?);
    }
    if n == 2 {
        return Ok(Graph::new(2, [(0, 1)])?);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    // Min-heap of current leaves; a vertex enters exactly once, when its
    // remaining degree first drops to 1.
    let mut leaves: BinaryHeap<Reverse<usize>> = degree
        .iter()
        .enumerate()
        .filter(|&(_, d)| *d == 1)
        .map(|(v, _)| Reverse(v))
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in &seq {
        let Reverse(leaf) = leaves.pop().expect("Pruefer decode ran out of leaves");
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(Reverse(s));
        }
    }
    let Reverse(a) = leaves.pop().expect("Pruefer decode missing final leaf");
    let Reverse(b) = leaves.pop().expect("Pruefer decode missing final leaf");
    edges.push((a, b));
    Ok(Graph::new(n, edges)?)
}

/// Random d-regular simple graph: pair up vertex stubs uniformly and
/// reject any pairing with a loop or parallel edge.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if n == 0 {
        bail!("regular graph needs at least 1 vertex");
    }
    if d >= n {
        bail!("degree {d} needs at least {} vertices", d + 1);
    }
    if !(n * d).is_multiple_of(2) {
        bail!("no {d}-regular graph on {n} vertices: n*d must be even");
    }
    if d == 0 {
        return Ok(Graph::new(n, [])?);
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..MAX_REJECTIONS {
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        return Ok(Graph::new(n, edges)?);
    }
    bail!("configuration model rejected {MAX_REJECTIONS} consecutive pairings for n={n}, d={d}")
}
