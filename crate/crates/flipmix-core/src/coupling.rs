//! Joint evolution of two chains differing at a single vertex.
//!
//! `build_coupling` produces an explicit event list: each event names the
//! cluster flipped in each chain (or none) and its probability. Both
//! one-sided marginals equal the per-cluster flip law exactly; the builder
//! audits this and refuses to emit a distribution that does not.
//!
//! Around the disagreement vertex the builder pairs each chain's large
//! cluster with the other chain's largest standalone counterpart, matches
//! the per-neighbor remainders, and lets identical clusters move in
//! lockstep everywhere else.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;
use rand::Rng;

use crate::blocking::{blocking_count, metric_neighboring, metric_upper_bound};
use crate::cluster::{cluster, cluster_bounded, flip, Cluster};
use crate::dynamics::flip_step;
use crate::graph::{hamming, Coloring, Graph, NeighboringPair};
use crate::rational::{rat, to_f64, Rat};
use crate::schedule::FlipSchedule;
use crate::{Error, Result};

type Key = (Vec<usize>, (u32, u32));

/// How a joint event moves the two chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The same cluster flips in both chains.
    Identity,
    /// Both chains recolor the disagreement vertex to a common fresh color.
    Coalesce,
    /// Distinct clusters flip together, one in each chain.
    Matched,
    /// Only the first chain flips.
    SoloX,
    /// Only the second chain flips.
    SoloY,
    /// Neither chain moves.
    Hold,
}

/// One atom of the coupling.
#[derive(Debug, Clone)]
pub struct JointEvent {
    pub flip_x: Option<Cluster>,
    pub flip_y: Option<Cluster>,
    pub probability: Rat,
    pub kind: EventKind,
}

struct Builder {
    events: Vec<JointEvent>,
    consumed_x: BTreeMap<Key, Rat>,
    consumed_y: BTreeMap<Key, Rat>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            events: Vec::new(),
            consumed_x: BTreeMap::new(),
            consumed_y: BTreeMap::new(),
        }
    }

    fn push(
        &mut self,
        flip_x: Option<&Cluster>,
        flip_y: Option<&Cluster>,
        probability: Rat,
        kind: EventKind,
    ) -> Result<()> {
        if probability.is_zero() {
            return Ok(());
        }
        if probability < Rat::zero() {
            return Err(Error::MarginalMismatch(format!(
                "event probability {probability} is negative; the schedule must be nonincreasing"
            )));
        }
        if let Some(cl) = flip_x {
            *self
                .consumed_x
                .entry(cl.key())
                .or_insert_with(Rat::zero) += &probability;
        }
        if let Some(cl) = flip_y {
            *self
                .consumed_y
                .entry(cl.key())
                .or_insert_with(Rat::zero) += &probability;
        }
        self.events.push(JointEvent {
            flip_x: flip_x.cloned(),
            flip_y: flip_y.cloned(),
            probability,
            kind,
        });
        Ok(())
    }
}

/// All clusters with positive flip probability, keyed by (members, colors).
fn flippable_clusters(g: &Graph, x: &Coloring, s: &FlipSchedule) -> BTreeMap<Key, Cluster> {
    let cutoff = s.support();
    let mut map = BTreeMap::new();
    for v in 0..g.n() {
        for c in 1..=x.k() {
            if c == x.get(v) {
                continue;
            }
            if let Some(cl) = cluster_bounded(g, x, v, c, cutoff) {
                if !s.probability(cl.len()).is_zero() {
                    map.entry(cl.key()).or_insert(cl);
                }
            }
        }
    }
    map
}

/// Alternating-path class of `start` over the two given colors, never
/// entering `avoid`. Returns sorted members.
fn class_avoiding(
    g: &Graph,
    x: &Coloring,
    start: usize,
    colors: (u32, u32),
    avoid: usize,
) -> Vec<usize> {
    let (p, q) = colors;
    let other = |col: u32| if col == p { q } else { p };
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    seen.insert(start);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let want = other(x.get(u));
        for &w in g.neighbors(u) {
            if w != avoid && x.get(w) == want && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.into_iter().collect()
}

/// Largest cluster, ties to the smallest minimum vertex. `None` when empty.
fn pick_largest(clusters: &[Cluster]) -> Option<usize> {
    (0..clusters.len()).max_by_key(|&i| {
        (
            clusters[i].len(),
            std::cmp::Reverse(clusters[i].members()[0]),
        )
    })
}

/// Argmax indices of a and b, preferring a common argmax, then the lowest
/// index on each side.
fn aligned_argmax(a: &[usize], b: &[usize]) -> (usize, usize) {
    let amax = *a.iter().max().expect("nonempty");
    let bmax = *b.iter().max().expect("nonempty");
    if let Some(i) = (0..a.len()).find(|&i| a[i] == amax && b[i] == bmax) {
        return (i, i);
    }
    (
        a.iter().position(|&v| v == amax).expect("max exists"),
        b.iter().position(|&v| v == bmax).expect("max exists"),
    )
}

/// Per-neighbor cluster machinery for one color worn in the neighborhood
/// of the disagreement vertex.
struct Machinery {
    sxv: Cluster,
    syv: Cluster,
    sx: Vec<Option<Cluster>>,
    sy: Vec<Option<Cluster>>,
    a: Vec<usize>,
    b: Vec<usize>,
    i_max: usize,
    i_prime_max: usize,
}

fn machinery(g: &Graph, pair: &NeighboringPair, c: u32, u_list: &[usize]) -> Machinery {
    let x = pair.x();
    let y = pair.y();
    let vstar = pair.vstar();
    let (cx, cy) = pair.endpoint_colors();
    let sxv = cluster(g, x, vstar, c);
    let syv = cluster(g, y, vstar, c);
    let mut sx: Vec<Option<Cluster>> = Vec::with_capacity(u_list.len());
    let mut sy: Vec<Option<Cluster>> = Vec::with_capacity(u_list.len());
    for &u in u_list {
        // A neighbor inside an earlier class contributes no new cluster.
        let dup_x = sx.iter().flatten().any(|cl: &Cluster| cl.contains(u));
        sx.push(if dup_x { None } else { Some(cluster(g, x, u, cy)) });
        let dup_y = sy.iter().flatten().any(|cl: &Cluster| cl.contains(u));
        sy.push(if dup_y { None } else { Some(cluster(g, y, u, cx)) });
    }
    let a: Vec<usize> = sx.iter().map(|o| o.as_ref().map_or(0, Cluster::len)).collect();
    let b: Vec<usize> = sy.iter().map(|o| o.as_ref().map_or(0, Cluster::len)).collect();
    debug_assert_eq!(1 + a.iter().sum::<usize>(), syv.len());
    debug_assert_eq!(1 + b.iter().sum::<usize>(), sxv.len());
    let (i_max, i_prime_max) = aligned_argmax(&a, &b);
    Machinery {
        sxv,
        syv,
        sx,
        sy,
        a,
        b,
        i_max,
        i_prime_max,
    }
}

/// Exact coupling of one move of both chains. Every cluster of either
/// chain receives total event mass equal to its marginal flip probability;
/// violations surface as `MarginalMismatch` instead of being papered over.
pub fn build_coupling(
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
) -> Result<Vec<JointEvent>> {
    let x = pair.x();
    let y = pair.y();
    let vstar = pair.vstar();
    let (cx, cy) = pair.endpoint_colors();
    let n = g.n();
    let k = x.k();
    let nk = rat(n as i64 * k as i64, 1);
    let map_x = flippable_clusters(g, x, s);
    let map_y = flippable_clusters(g, y, s);
    let mut bld = Builder::new();

    // Endpoint color pair: the disagreement vertex's own two colors.
    let tx = cluster(g, x, vstar, cy);
    let ty = cluster(g, y, vstar, cx);
    let endpoint_shared = tx.members() == ty.members();
    if !endpoint_shared {
        endpoint_color_events(&mut bld, g, pair, s, &nk, &tx, &ty)?;
    }

    // Every other color, by its multiplicity in the neighborhood.
    let nbrs = g.neighbors(vstar);
    for c in 1..=k {
        if c == cx || c == cy {
            continue;
        }
        let u_list: Vec<usize> = nbrs.iter().copied().filter(|&u| x.get(u) == c).collect();
        if u_list.is_empty() {
            // Both chains can recolor the disagreement vertex to c freely.
            let fx = cluster(g, x, vstar, c);
            let fy = cluster(g, y, vstar, c);
            debug_assert_eq!(fx.len(), 1);
            debug_assert_eq!(fy.len(), 1);
            let p = s.probability(1) / &nk;
            bld.push(Some(&fx), Some(&fy), p, EventKind::Coalesce)?;
        } else {
            disagreement_color_events(&mut bld, g, pair, s, &nk, c, &u_list)?;
        }
    }

    // Clusters identical in both chains and untouched so far.
    for (key, cl_x) in &map_x {
        if bld.consumed_x.contains_key(key) || bld.consumed_y.contains_key(key) {
            continue;
        }
        let Some(cl_y) = map_y.get(key) else {
            continue; // one-sided leftovers fail the audit below
        };
        let ell = cl_x.len();
        let p = s.probability(ell);
        if cl_x.contains(vstar) {
            // Shared cluster through the disagreement vertex: of its ell
            // selectors, ell - 1 act on both chains and one acts on each
            // chain alone.
            let ell_r = rat(ell as i64, 1);
            if ell > 1 {
                let joint = &p * rat(ell as i64 - 1, 1) / (&ell_r * &nk);
                bld.push(Some(cl_x), Some(cl_y), joint, EventKind::Identity)?;
            }
            let side = &p / (&ell_r * &nk);
            bld.push(Some(cl_x), None, side.clone(), EventKind::SoloX)?;
            bld.push(None, Some(cl_y), side, EventKind::SoloY)?;
        } else {
            bld.push(Some(cl_x), Some(cl_y), &p / &nk, EventKind::Identity)?;
        }
    }

    // Audit: every cluster's consumed mass must equal its marginal.
    for (side, map, consumed) in [
        ("first", &map_x, &bld.consumed_x),
        ("second", &map_y, &bld.consumed_y),
    ] {
        for (key, cl) in map.iter() {
            let expected = s.probability(cl.len()) / &nk;
            let got = consumed.get(key).cloned().unwrap_or_else(Rat::zero);
            if got != expected {
                return Err(Error::MarginalMismatch(format!(
                    "{side} chain cluster {:?} consumed {got}, marginal requires {expected}",
                    key
                )));
            }
        }
        for key in consumed.keys() {
            if !map.contains_key(key) {
                return Err(Error::MarginalMismatch(format!(
                    "{side} chain consumed unknown cluster {:?}",
                    key
                )));
            }
        }
    }

    let mut total = Rat::zero();
    for e in &bld.events {
        total += &e.probability;
    }
    let residual = rat(1, 1) - total;
    if residual < Rat::zero() {
        return Err(Error::MarginalMismatch(format!(
            "joint event mass exceeds one by {}",
            -residual
        )));
    }
    if !residual.is_zero() {
        bld.events.push(JointEvent {
            flip_x: None,
            flip_y: None,
            probability: residual,
            kind: EventKind::Hold,
        });
    }
    Ok(bld.events)
}

/// Events for the two colors of the disagreement vertex when the chains'
/// clusters there differ. Each chain's cluster is paired with the other
/// chain's largest standalone class; standalone remainders move alone.
fn endpoint_color_events(
    bld: &mut Builder,
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
    nk: &Rat,
    tx: &Cluster,
    ty: &Cluster,
) -> Result<()> {
    let x = pair.x();
    let y = pair.y();
    let vstar = pair.vstar();
    let (cx, cy) = pair.endpoint_colors();
    let other = |col: u32| if col == cx { cy } else { cx };
    let nbrs = g.neighbors(vstar);
    let mut assigned: BTreeSet<usize> = BTreeSet::new();
    let mut standalone_x: Vec<Cluster> = Vec::new();
    let mut standalone_y: Vec<Cluster> = Vec::new();
    let mut absorbed_both = 0usize;
    for &w in nbrs {
        let cw = x.get(w);
        if (cw != cx && cw != cy) || assigned.contains(&w) {
            continue;
        }
        let members = class_avoiding(g, x, w, (cx, cy), vstar);
        assigned.extend(members.iter().copied());
        let touches_cx = members
            .iter()
            .any(|&u| x.get(u) == cx && nbrs.binary_search(&u).is_ok());
        let touches_cy = members
            .iter()
            .any(|&u| x.get(u) == cy && nbrs.binary_search(&u).is_ok());
        match (touches_cx, touches_cy) {
            // Only the chain whose endpoint color alternates with the
            // class absorbs it; in the other chain it stands alone.
            (true, false) => standalone_x.push(cluster(g, x, w, other(cw))),
            (false, true) => standalone_y.push(cluster(g, y, w, other(cw))),
            (true, true) => absorbed_both += members.len(),
            (false, false) => unreachable!("class seeded from a neighbor touches the vertex"),
        }
    }
    debug_assert_eq!(
        tx.len(),
        1 + absorbed_both + standalone_y.iter().map(Cluster::len).sum::<usize>()
    );
    debug_assert_eq!(
        ty.len(),
        1 + absorbed_both + standalone_x.iter().map(Cluster::len).sum::<usize>()
    );
    let p_tx = s.probability(tx.len());
    let p_ty = s.probability(ty.len());
    let chosen_y = pick_largest(&standalone_y);
    let chosen_x = pick_largest(&standalone_x);
    let kind_for = |partner: bool, solo: EventKind| if partner { EventKind::Matched } else { solo };
    bld.push(
        Some(tx),
        chosen_y.map(|i| &standalone_y[i]),
        &p_tx / nk,
        kind_for(chosen_y.is_some(), EventKind::SoloX),
    )?;
    bld.push(
        chosen_x.map(|i| &standalone_x[i]),
        Some(ty),
        &p_ty / nk,
        kind_for(chosen_x.is_some(), EventKind::SoloY),
    )?;
    for (i, klass) in standalone_y.iter().enumerate() {
        let mut q = s.probability(klass.len());
        if Some(i) == chosen_y {
            q -= &p_tx;
        }
        bld.push(None, Some(klass), q / nk, EventKind::SoloY)?;
    }
    for (i, klass) in standalone_x.iter().enumerate() {
        let mut q = s.probability(klass.len());
        if Some(i) == chosen_x {
            q -= &p_ty;
        }
        bld.push(Some(klass), None, q / nk, EventKind::SoloX)?;
    }
    Ok(())
}

/// Events for a color worn by at least one neighbor of the disagreement
/// vertex: each chain's large cluster pairs with the other chain's largest
/// per-neighbor class, matched remainders move together, excess moves
/// alone.
fn disagreement_color_events(
    bld: &mut Builder,
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
    nk: &Rat,
    c: u32,
    u_list: &[usize],
) -> Result<()> {
    let mech = machinery(g, pair, c, u_list);
    let p_a = s.probability(mech.syv.len());
    let p_b = s.probability(mech.sxv.len());
    bld.push(
        Some(&mech.sxv),
        mech.sy[mech.i_prime_max].as_ref(),
        &p_b / nk,
        EventKind::Matched,
    )?;
    bld.push(
        mech.sx[mech.i_max].as_ref(),
        Some(&mech.syv),
        &p_a / nk,
        EventKind::Matched,
    )?;
    for i in 0..u_list.len() {
        let mut q = s.probability(mech.a[i]);
        if i == mech.i_max {
            q -= &p_a;
        }
        let mut qp = s.probability(mech.b[i]);
        if i == mech.i_prime_max {
            qp -= &p_b;
        }
        if q < Rat::zero() || qp < Rat::zero() {
            return Err(Error::MarginalMismatch(format!(
                "remainder for neighbor {} under color {} is negative; the schedule must be \
                 nonincreasing",
                u_list[i], c
            )));
        }
        let joint = q.clone().min(qp.clone());
        bld.push(
            mech.sx[i].as_ref(),
            mech.sy[i].as_ref(),
            joint.clone() / nk,
            EventKind::Matched,
        )?;
        if q > joint {
            bld.push(mech.sx[i].as_ref(), None, (&q - &joint) / nk, EventKind::SoloX)?;
        }
        if qp > joint {
            bld.push(None, mech.sy[i].as_ref(), (&qp - &joint) / nk, EventKind::SoloY)?;
        }
    }
    Ok(())
}

/// Draw one event by inverse transform on the event probabilities.
pub fn sample_event<'a, R: Rng + ?Sized>(events: &'a [JointEvent], rng: &mut R) -> &'a JointEvent {
    let r = rng.random::<f64>();
    let mut acc = 0.0;
    for e in events {
        acc += to_f64(&e.probability);
        if r < acc {
            return e;
        }
    }
    events.last().expect("event list is nonempty")
}

fn apply_side(col: &Coloring, f: &Option<Cluster>) -> Result<Coloring> {
    match f {
        Some(cl) => flip(col, cl),
        None => Ok(col.clone()),
    }
}

/// Advance both chains by one coupled move. Coalesced chains move in
/// lockstep; chains differing at one vertex follow the coupling. Pairs
/// further apart are rejected.
pub fn coupled_step<R: Rng + ?Sized>(
    g: &Graph,
    x: &Coloring,
    y: &Coloring,
    s: &FlipSchedule,
    rng: &mut R,
) -> Result<(Coloring, Coloring)> {
    if x == y {
        let x2 = flip_step(g, x, s, rng);
        let y2 = x2.clone();
        return Ok((x2, y2));
    }
    let pair = NeighboringPair::new(x.clone(), y.clone())?;
    let events = build_coupling(g, &pair, s)?;
    let ev = sample_event(&events, rng);
    let x2 = apply_side(x, &ev.flip_x)?;
    let y2 = apply_side(y, &ev.flip_y)?;
    Ok((x2, y2))
}

/// Expected one-step change in the number of disagreements.
pub fn expected_hamming_change(
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
) -> Result<Rat> {
    let events = build_coupling(g, pair, s)?;
    let mut acc = Rat::zero();
    for e in &events {
        if e.flip_x.is_none() && e.flip_y.is_none() {
            continue;
        }
        let x2 = apply_side(pair.x(), &e.flip_x)?;
        let y2 = apply_side(pair.y(), &e.flip_y)?;
        let h = hamming(&x2, &y2) as i64;
        acc += &e.probability * rat(h - 1, 1);
    }
    Ok(acc)
}

/// Expected one-step change in the number of disagreements inside `subset`.
pub fn expected_hamming_change_restricted(
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
    subset: &[usize],
) -> Result<Rat> {
    let events = build_coupling(g, pair, s)?;
    let count = |a: &Coloring, b: &Coloring| {
        subset.iter().filter(|&&v| a.get(v) != b.get(v)).count() as i64
    };
    let before = count(pair.x(), pair.y());
    let mut acc = Rat::zero();
    for e in &events {
        if e.flip_x.is_none() && e.flip_y.is_none() {
            continue;
        }
        let x2 = apply_side(pair.x(), &e.flip_x)?;
        let y2 = apply_side(pair.y(), &e.flip_y)?;
        acc += &e.probability * rat(count(&x2, &y2) - before, 1);
    }
    Ok(acc)
}

/// Expected one-step change of the weighted disagreement sum.
pub fn expected_metric_change(
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
) -> Result<Rat> {
    let events = build_coupling(g, pair, s)?;
    let before = metric_neighboring(g, pair, s);
    let mut acc = Rat::zero();
    for e in &events {
        let value = if e.flip_x.is_none() && e.flip_y.is_none() {
            before.clone()
        } else {
            let x2 = apply_side(pair.x(), &e.flip_x)?;
            let y2 = apply_side(pair.y(), &e.flip_y)?;
            metric_upper_bound(g, &x2, &y2, s)?
        };
        acc += &e.probability * value;
    }
    Ok(acc - before)
}

/// Vertices other than the disagreement vertex that a cluster move under
/// color `c` can touch: the union of both chains' clusters at the
/// disagreement vertex, minus that vertex.
pub fn l_set(g: &Graph, pair: &NeighboringPair, c: u32) -> Result<Vec<usize>> {
    let (cx, cy) = pair.endpoint_colors();
    if c == 0 || c > pair.x().k() {
        return Err(Error::Domain(format!("color {c} is outside the palette")));
    }
    if c == cx || c == cy {
        return Err(Error::Domain(format!(
            "color {c} is an endpoint color of the pair"
        )));
    }
    let sxv = cluster(g, pair.x(), pair.vstar(), c);
    let syv = cluster(g, pair.y(), pair.vstar(), c);
    let mut set: BTreeSet<usize> = sxv.members().iter().copied().collect();
    set.extend(syv.members().iter().copied());
    set.remove(&pair.vstar());
    Ok(set.into_iter().collect())
}

/// Cluster-size profile of one neighborhood color: per-neighbor class
/// sizes in each chain (zero for a neighbor swallowed by an earlier
/// class), the two big cluster sizes, the paired indices, overlap sizes,
/// and the blocking census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorConfig {
    pub color: u32,
    pub d_c: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub big_a: usize,
    pub big_b: usize,
    pub i_max: usize,
    pub i_prime_max: usize,
    pub m: Vec<usize>,
    pub d0: usize,
    pub d1: usize,
    pub d2plus: usize,
}

impl ColorConfig {
    /// Validated synthetic configuration. Enforces the shape every real
    /// instance satisfies: first classes own their neighbor, swallowed
    /// neighbors need earlier capacity, overlaps fit inside both classes,
    /// and the blocking census is achievable for the class sizes.
    pub fn new(
        color: u32,
        a: Vec<usize>,
        b: Vec<usize>,
        m: Vec<usize>,
        d0: usize,
        d1: usize,
        d2plus: usize,
    ) -> Result<Self> {
        let d_c = a.len();
        if d_c == 0 {
            return Err(Error::Config("a configuration needs at least one neighbor".into()));
        }
        if b.len() != d_c || m.len() != d_c {
            return Err(Error::Config("a, b, m must have equal length".into()));
        }
        if d0 + d1 + d2plus != d_c {
            return Err(Error::Config(
                "blocking census must cover every neighbor exactly once".into(),
            ));
        }
        if a[0] == 0 || b[0] == 0 {
            return Err(Error::Config("the first class on each side is never swallowed".into()));
        }
        for (label, v) in [("a", &a), ("b", &b)] {
            // A class of size s hosts at most s - 2 later same-color
            // neighbors: one slot for its own neighbor, one for a
            // connector.
            let mut capacity = 0usize;
            for &s in v.iter() {
                if s == 0 {
                    if capacity == 0 {
                        return Err(Error::Config(format!(
                            "{label} swallows a neighbor without an earlier class of size >= 3"
                        )));
                    }
                    capacity -= 1;
                } else if s >= 3 {
                    capacity += s - 2;
                }
            }
        }
        for i in 0..d_c {
            if a[i] == 0 || b[i] == 0 {
                if m[i] != 0 {
                    return Err(Error::Config(
                        "a swallowed neighbor has no overlap of its own".into(),
                    ));
                }
            } else if m[i] < 1 || m[i] > a[i].min(b[i]) {
                return Err(Error::Config(
                    "overlap must include the neighbor and fit inside both classes".into(),
                ));
            }
        }
        // Census feasibility from per-neighbor class sizes.
        let mut forced_u = 0usize;
        let mut forced_s = 0usize;
        let mut forced_m = 0usize;
        for i in 0..d_c {
            match (a[i], b[i]) {
                (1, 1) => forced_u += 1,
                (1, 2) | (2, 1) => forced_s += 1,
                (0, 1) | (1, 0) => {}
                (1, v) | (v, 1) if v >= 3 => {}
                _ => forced_m += 1,
            }
        }
        if d0 != forced_u {
            return Err(Error::Config(format!(
                "class sizes force exactly {forced_u} unblocked neighbors, census says {d0}"
            )));
        }
        if d1 < forced_s || d2plus < forced_m {
            return Err(Error::Config(
                "census undercounts neighbors forced singly or multiply blocked".into(),
            ));
        }
        let (i_max, i_prime_max) = aligned_argmax(&a, &b);
        let big_a = 1 + a.iter().sum::<usize>();
        let big_b = 1 + b.iter().sum::<usize>();
        Ok(ColorConfig {
            color,
            d_c,
            a,
            b,
            big_a,
            big_b,
            i_max,
            i_prime_max,
            m,
            d0,
            d1,
            d2plus,
        })
    }
}

/// Extract the configuration of one neighborhood color from a concrete
/// pair. The color must be worn by a neighbor of the disagreement vertex.
pub fn color_config(g: &Graph, pair: &NeighboringPair, c: u32) -> Result<ColorConfig> {
    let (cx, cy) = pair.endpoint_colors();
    if c == 0 || c > pair.x().k() {
        return Err(Error::Domain(format!("color {c} is outside the palette")));
    }
    if c == cx || c == cy {
        return Err(Error::Domain(format!(
            "color {c} is an endpoint color of the pair"
        )));
    }
    let vstar = pair.vstar();
    let u_list: Vec<usize> = g
        .neighbors(vstar)
        .iter()
        .copied()
        .filter(|&u| pair.x().get(u) == c)
        .collect();
    if u_list.is_empty() {
        return Err(Error::Domain(format!(
            "color {c} is not worn by any neighbor of the disagreement vertex"
        )));
    }
    let mech = machinery(g, pair, c, &u_list);
    let m: Vec<usize> = (0..u_list.len())
        .map(|i| match (&mech.sx[i], &mech.sy[i]) {
            (Some(sx), Some(sy)) => sx.members().iter().filter(|v| sy.contains(**v)).count(),
            _ => 0,
        })
        .collect();
    let mut d0 = 0;
    let mut d1 = 0;
    let mut d2plus = 0;
    for &u in &u_list {
        match blocking_count(g, pair, u)? {
            0 => d0 += 1,
            1 => d1 += 1,
            _ => d2plus += 1,
        }
    }
    let config = ColorConfig {
        color: c,
        d_c: u_list.len(),
        a: mech.a.clone(),
        b: mech.b.clone(),
        big_a: mech.syv.len(),
        big_b: mech.sxv.len(),
        i_max: mech.i_max,
        i_prime_max: mech.i_prime_max,
        m,
        d0,
        d1,
        d2plus,
    };
    debug_assert!(
        ColorConfig::new(
            config.color,
            config.a.clone(),
            config.b.clone(),
            config.m.clone(),
            config.d0,
            config.d1,
            config.d2plus,
        )
        .is_ok(),
        "extracted configuration fails its own validator"
    );
    Ok(config)
}
