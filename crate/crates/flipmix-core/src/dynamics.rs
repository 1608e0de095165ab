//! The flip chain: single-step samplers, exact transition matrices over
//! explicit state spaces, and total-variation mixing curves.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::Zero;
use rand::Rng;

use crate::cluster::{cluster_bounded, flip};
use crate::graph::{Coloring, Graph};
use crate::rational::{rat, to_f64, Rat};
use crate::schedule::FlipSchedule;
use crate::{Error, Result};

/// One move of the flip chain: draw (v, c) uniformly from V x [k], flip the
/// cluster of (v, c) with probability P_ell / ell.
pub fn flip_step<R: Rng + ?Sized>(
    g: &Graph,
    x: &Coloring,
    s: &FlipSchedule,
    rng: &mut R,
) -> Coloring {
    let n = g.n();
    let k = x.k();
    let v = rng.random_range(0..n);
    let c = rng.random_range(1..=k);
    if c == x.get(v) {
        return x.clone();
    }
    let cutoff = s.support();
    let Some(cl) = cluster_bounded(g, x, v, c, cutoff) else {
        return x.clone();
    };
    let ell = cl.len();
    let accept = to_f64(&(s.probability(ell) / rat(ell as i64, 1)));
    if rng.random::<f64>() < accept {
        flip(x, &cl).expect("freshly computed cluster cannot be stale")
    } else {
        x.clone()
    }
}

/// One move of single-site dynamics: recolor a uniform vertex with a
/// uniform color when no neighbor wears it. Distributionally identical to
/// `flip_step` with the schedule (1, 0, 0, ...).
pub fn glauber_step<R: Rng + ?Sized>(g: &Graph, x: &Coloring, rng: &mut R) -> Coloring {
    let v = rng.random_range(0..g.n());
    let c = rng.random_range(1..=x.k());
    if c == x.get(v) {
        return x.clone();
    }
    if g.neighbors(v).iter().any(|&u| x.get(u) == c) {
        return x.clone();
    }
    let mut out = x.clone();
    out.set(v, c).expect("palette color");
    out
}

/// Exact one-step distribution from `x`: successor colorings with their
/// probabilities, sorted lexicographically, summing to 1. The lazy self-loop
/// mass is included.
pub fn transition_row(g: &Graph, s: &FlipSchedule, x: &Coloring) -> Vec<(Coloring, Rat)> {
    let n = g.n();
    let k = x.k();
    let nk = rat((n as i64) * (k as i64), 1);
    let cutoff = s.support();
    let mut weights: BTreeMap<Coloring, Rat> = BTreeMap::new();
    let mut moved = Rat::zero();
    for v in 0..n {
        for c in 1..=k {
            if c == x.get(v) {
                continue;
            }
            let Some(cl) = cluster_bounded(g, x, v, c, cutoff) else {
                continue;
            };
            let ell = cl.len();
            let p = s.probability(ell);
            if p.is_zero() {
                continue;
            }
            let w = p / (rat(ell as i64, 1) * &nk);
            let successor = flip(x, &cl).expect("fresh cluster");
            moved += &w;
            *weights.entry(successor).or_insert_with(Rat::zero) += w;
        }
    }
    let stay = rat(1, 1) - moved;
    *weights.entry(x.clone()).or_insert_with(Rat::zero) += stay;
    weights.into_iter().collect()
}

/// Exact transition matrix over an explicit state list, stored sparsely.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    states: Vec<Coloring>,
    rows: Vec<Vec<(usize, Rat)>>,
}

/// Builds the exact matrix over `states`. Every one-step successor of every
/// state must lie in `states`; otherwise the offending move is named.
pub fn transition_matrix(
    g: &Graph,
    s: &FlipSchedule,
    states: &[Coloring],
) -> Result<TransitionMatrix> {
    if states.is_empty() {
        return Err(Error::Config("empty state list".to_string()));
    }
    let k = states[0].k();
    let n = g.n();
    let mut index: HashMap<&[u32], usize> = HashMap::with_capacity(states.len());
    for (i, state) in states.iter().enumerate() {
        if state.k() != k || state.len() != n {
            return Err(Error::Config(format!(
                "state {i} does not match palette/vertex count of state 0"
            )));
        }
        if index.insert(state.as_slice(), i).is_some() {
            return Err(Error::Config(format!("duplicate state at index {i}")));
        }
    }
    let nk = rat((n as i64) * (k as i64), 1);
    let cutoff = s.support();
    let mut rows = Vec::with_capacity(states.len());
    for (i, x) in states.iter().enumerate() {
        let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
        let mut moved = Rat::zero();
        for v in 0..n {
            for c in 1..=k {
                if c == x.get(v) {
                    continue;
                }
                let Some(cl) = cluster_bounded(g, x, v, c, cutoff) else {
                    continue;
                };
                let p = s.probability(cl.len());
                if p.is_zero() {
                    continue;
                }
                let successor = flip(x, &cl).expect("fresh cluster");
                let Some(&j) = index.get(successor.as_slice()) else {
                    return Err(Error::NotClosed {
                        state: i,
                        vertex: v,
                        color: c,
                    });
                };
                let w = p / (rat(cl.len() as i64, 1) * &nk);
                moved += &w;
                *row.entry(j).or_insert_with(Rat::zero) += w;
            }
        }
        let stay = rat(1, 1) - moved;
        *row.entry(i).or_insert_with(Rat::zero) += stay;
        let row: Vec<(usize, Rat)> = row.into_iter().collect();
        rows.push(row);
    }
    Ok(TransitionMatrix {
        states: states.to_vec(),
        rows,
    })
}

impl TransitionMatrix {
    pub fn states(&self) -> &[Coloring] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Sparse row: (column, probability) pairs sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, Rat)] {
        &self.rows[i]
    }

    pub fn find_state(&self, x: &Coloring) -> Option<usize> {
        self.states.iter().position(|s| s == x)
    }

    pub fn row_sum(&self, i: usize) -> Rat {
        self.rows[i]
            .iter()
            .fold(Rat::zero(), |acc, (_, p)| acc + p)
    }

    /// Uniform is stationary iff the matrix is doubly stochastic.
    pub fn is_doubly_stochastic(&self) -> bool {
        let mut col = vec![Rat::zero(); self.states.len()];
        for row in &self.rows {
            for (j, p) in row {
                col[*j] += p;
            }
        }
        let one = rat(1, 1);
        col.iter().all(|c| *c == one)
            && (0..self.states.len()).all(|i| self.row_sum(i) == one)
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for (j, p) in &self.rows[i] {
                if !p.is_zero() && !seen[*j] {
                    seen[*j] = true;
                    queue.push_back(*j);
                }
            }
        }
        seen
    }

    fn check_irreducible_from(&self, start: usize) -> Result<()> {
        let seen = self.reachable_from(start);
        let unreachable = seen.iter().filter(|&&s| !s).count();
        if unreachable > 0 {
            let first = seen.iter().position(|&s| !s).unwrap();
            return Err(Error::Reducible {
                unreachable,
                total: self.states.len(),
                first_unreachable: first,
            });
        }
        Ok(())
    }

    /// Stationary distribution: exact uniform when doubly stochastic,
    /// otherwise power iteration to L1 tolerance 1e-12.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let m = self.states.len();
        if self.is_doubly_stochastic() {
            return Ok(vec![1.0 / m as f64; m]);
        }
        let rows = self.rows_f64();
        let mut pi = vec![1.0 / m as f64; m];
        for _ in 0..1_000_000 {
            let mut next = vec![0.0; m];
            for (i, row) in rows.iter().enumerate() {
                for &(j, p) in row {
                    next[j] += pi[i] * p;
                }
            }
            let total: f64 = next.iter().sum();
            for value in &mut next {
                *value /= total;
            }
            let diff: f64 = pi
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .sum();
            pi = next;
            if diff <= 1e-12 {
                return Ok(pi);
            }
        }
        Err(Error::Domain(
            "stationary distribution did not converge to 1e-12".to_string(),
        ))
    }

    fn rows_f64(&self) -> Vec<Vec<(usize, f64)>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(j, p)| (*j, to_f64(p))).collect())
            .collect()
    }

    /// Total-variation distance to stationarity at t = 0..=t_max starting
    /// from `start`. Errors when some state is unreachable from `start`.
    pub fn tv_mixing_curve(&self, start: usize, t_max: usize) -> Result<Vec<f64>> {
        if start >= self.states.len() {
            return Err(Error::Domain(format!("start state {start} out of range")));
        }
        self.check_irreducible_from(start)?;
        let pi = self.stationary_distribution()?;
        let rows = self.rows_f64();
        let m = self.states.len();
        let mut mu = vec![0.0; m];
        mu[start] = 1.0;
        let mut curve = Vec::with_capacity(t_max + 1);
        for _ in 0..=t_max {
            let tv: f64 = 0.5
                * mu.iter()
                    .zip(&pi)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
            curve.push(tv);
            let mut next = vec![0.0; m];
            for (i, row) in rows.iter().enumerate() {
                if mu[i] == 0.0 {
                    continue;
                }
                for &(j, p) in row {
                    next[j] += mu[i] * p;
                }
            }
            mu = next;
        }
        Ok(curve)
    }

    /// Pointwise-max TV curve over all start states.
    pub fn tv_mixing_curve_worst(&self, t_max: usize) -> Result<Vec<f64>> {
        let mut worst = vec![0.0; t_max + 1];
        for start in 0..self.states.len() {
            let curve = self.tv_mixing_curve(start, t_max)?;
            for (w, c) in worst.iter_mut().zip(curve) {
                if c > *w {
                    *w = c;
                }
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_proper_colorings;

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_matrix_is_doubly_stochastic() {
        let g = triangle();
        let states = enumerate_proper_colorings(&g, 3).unwrap();
        assert_eq!(states.len(), 6);
        let m = transition_matrix(&g, &FlipSchedule::setting_1_1(), &states).unwrap();
        assert!(m.is_doubly_stochastic());
        for i in 0..states.len() {
            assert_eq!(m.row_sum(i), rat(1, 1));
        }
    }

    #[test]
    fn transition_row_matches_matrix_row() {
        let g = triangle();
        let s = FlipSchedule::setting_1_1();
        let states = enumerate_proper_colorings(&g, 3).unwrap();
        let m = transition_matrix(&g, &s, &states).unwrap();
        for (i, x) in states.iter().enumerate() {
            let row = transition_row(&g, &s, x);
            let from_matrix: Vec<(Coloring, Rat)> = m
                .row(i)
                .iter()
                .map(|(j, p)| (states[*j].clone(), p.clone()))
                .collect();
            assert_eq!(row, from_matrix);
        }
    }

    #[test]
    fn closure_violation_names_the_move() {
        let g = triangle();
        let s = FlipSchedule::setting_1_1();
        let mut states = enumerate_proper_colorings(&g, 3).unwrap();
        states.pop();
        match transition_matrix(&g, &s, &states) {
            Err(Error::NotClosed { state, vertex, color }) => {
                assert!(state < states.len());
                assert!(vertex < 3);
                assert!((1..=3).contains(&color));
            }
            other => panic!("expected closure error, got {other:?}"),
        }
    }

    #[test]
    fn glauber_on_triangle_is_frozen_and_reducible() {
        // With k = 3 every single-site recoloring of a proper triangle
        // coloring is blocked, so the chain cannot leave its start state.
        let g = triangle();
        let states = enumerate_proper_colorings(&g, 3).unwrap();
        let m = transition_matrix(&g, &FlipSchedule::glauber(), &states).unwrap();
        match m.tv_mixing_curve(0, 5) {
            Err(Error::Reducible {
                unreachable, total, ..
            }) => {
                assert_eq!(unreachable, 5);
                assert_eq!(total, 6);
            }
            other => panic!("expected reducible error, got {other:?}"),
        }
    }

    #[test]
    fn flip_chain_on_triangle_mixes() {
        let g = triangle();
        let states = enumerate_proper_colorings(&g, 3).unwrap();
        let m = transition_matrix(&g, &FlipSchedule::setting_1_1(), &states).unwrap();
        let curve = m.tv_mixing_curve(0, 200).unwrap();
        assert!((curve[0] - 5.0 / 6.0).abs() < 1e-12);
        for pair in curve.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        assert!(curve[200] < 0.01);
    }

    #[test]
    fn glauber_step_matches_flip_step_distribution_exactly() {
        // On the single edge with k = 3 the two kernels coincide; compare
        // matrices entry-wise.
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let states = enumerate_proper_colorings(&g, 3).unwrap();
        let m = transition_matrix(&g, &FlipSchedule::glauber(), &states).unwrap();
        // Manual kernel: recolor (v, c) allowed iff neighbor color differs.
        for (i, x) in states.iter().enumerate() {
            let mut expected: BTreeMap<usize, Rat> = BTreeMap::new();
            let mut moved = Rat::zero();
            for v in 0..2 {
                for c in 1..=3u32 {
                    if c == x.get(v) || x.get(1 - v) == c {
                        continue;
                    }
                    let mut y = x.clone();
                    y.set(v, c).unwrap();
                    let j = states.iter().position(|s| *s == y).unwrap();
                    *expected.entry(j).or_insert_with(Rat::zero) += rat(1, 6);
                    moved += rat(1, 6);
                }
            }
            *expected.entry(i).or_insert_with(Rat::zero) += rat(1, 1) - moved;
            let got: BTreeMap<usize, Rat> = m.row(i).iter().cloned().collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn improper_states_are_transient_when_k_is_large_enough() {
        // Single edge, k = 3 >= max degree + 2: every improper labeling
        // reaches the proper set, and the proper set is closed.
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let all = crate::graph::enumerate_all_labelings(2, 3).unwrap();
        let s = FlipSchedule::setting_1_1();
        let m = transition_matrix(&g, &s, &all).unwrap();
        let proper: Vec<bool> = all
            .iter()
            .map(|x| crate::graph::is_proper(&g, x).unwrap())
            .collect();
        for (i, x) in all.iter().enumerate() {
            if proper[i] {
                // Closed: successors stay proper.
                for (j, p) in m.row(i) {
                    if !p.is_zero() {
                        assert!(proper[*j], "proper state {x} leaked to improper");
                    }
                }
            } else {
                let seen = m.reachable_from(i);
                assert!(
                    seen.iter()
                        .enumerate()
                        .any(|(j, &reached)| reached && proper[j]),
                    "improper state {x} cannot reach the proper set"
                );
            }
        }
    }
}
