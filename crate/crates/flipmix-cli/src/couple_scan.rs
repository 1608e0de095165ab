//! `flipmix couple-scan`: one-step coupling statistics over random
//! neighboring pairs, plus optional coupled trajectories.
//!
//! Each trial draws a random proper coloring, recolors one vertex to get a
//! neighboring pair, computes the exact one-step law of the coupling
//! (expected Hamming change, coalescence mass, and the identity-coalescence
//! lower bound |A(v*)|/(nk)), then follows the coupled chains while their
//! Hamming distance stays at 1. The coupling is defined only on neighboring
//! pairs, so a trajectory stops, after logging, the moment the distance
//! leaves 1.
//!
//! Trials parallelize across `FLIPMIX_THREADS` workers; per-trial RNG
//! streams come from (seed, trial index) and the aggregates are sums of
//! exact rationals, so output bytes are independent of the worker count.

use crate::generators::GraphSpec;
use crate::output::{csv_row, open_sink, write_run_header, DECIMAL_SIG};
use crate::CoupleScanArgs;
use anyhow::{bail, Result};
use flipmix_core::{
    build_coupling, coupled_step, flip, hamming, metric_upper_bound, rat, render_decimal,
    render_exact, to_f64, Cluster, Coloring, FlipSchedule, Graph, NeighboringPair, Rat,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

struct TrajPoint {
    step: usize,
    hamming: usize,
    bound: Rat,
}

struct TrialStats {
    expected_change: Rat,
    coalesce_prob: Rat,
    coalesce_bound: Rat,
    steps_run: usize,
    outcome: &'static str,
    trajectory: Vec<TrajPoint>,
}

pub fn run(args: &CoupleScanArgs) -> Result<()> {
    if args.trials == 0 {
        bail!("need at least one trial");
    }
    let spec = GraphSpec::parse(&args.graph)?;
    let schedule = crate::resolve_schedule(&args.schedule)?;
    // Fixed graphs are built once on stream 0; random generators draw a
    // fresh instance inside each trial's own stream instead.
    let shared: Option<Graph> = if spec.is_random() {
        None
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        rng.set_stream(0);
        let g = spec.build(&mut rng)?;
        crate::warn_if_below_ergodic(&g, args.k);
        Some(g)
    };

    let results = run_trials(args, &spec, shared.as_ref(), &schedule)?;

    let mut sum = rat(0, 1);
    let mut sumsq = rat(0, 1);
    let mut coalesce_sum = rat(0, 1);
    let (mut coalesced, mut diverged, mut exhausted) = (0usize, 0usize, 0usize);
    for r in &results {
        sum += r.expected_change.clone();
        sumsq += &r.expected_change * &r.expected_change;
        coalesce_sum += r.coalesce_prob.clone();
        match r.outcome {
            "coalesced" => coalesced += 1,
            "diverged" => diverged += 1,
            _ => exhausted += 1,
        }
    }
    let m = rat(args.trials as i64, 1);
    let mean = &sum / &m;
    let mean_coalesce = &coalesce_sum / &m;
    let stderr = if args.trials > 1 {
        let population = &sumsq / &m - &mean * &mean;
        let sample = population * rat(args.trials as i64, args.trials as i64 - 1);
        (to_f64(&sample) / args.trials as f64).max(0.0).sqrt()
    } else {
        0.0
    };

    let desc = format!(
        "cmd=couple-scan graph={} k={} schedule={} seed={} trials={} steps={} log_trajectories={}",
        args.graph, args.k, args.schedule, args.seed, args.trials, args.steps,
        args.log_trajectories
    );
    let mut w = open_sink(args.out.as_ref())?;
    write_run_header(
        &mut *w,
        &desc,
        args.seed,
        &[("aggregation", "exact-rational-sum".to_string())],
    )?;

    if args.log_trajectories {
        csv_row(&mut *w, &["trial", "step", "hamming", "metric_bound"])?;
        for (i, r) in results.iter().enumerate() {
            for p in &r.trajectory {
                csv_row(
                    &mut *w,
                    &[
                        &i.to_string(),
                        &p.step.to_string(),
                        &p.hamming.to_string(),
                        &render_decimal(&p.bound, DECIMAL_SIG),
                    ],
                )?;
            }
        }
    } else {
        csv_row(
            &mut *w,
            &[
                "trial",
                "expected_change",
                "expected_change_exact",
                "coalesce_prob",
                "coalesce_bound",
                "steps",
                "outcome",
            ],
        )?;
        for (i, r) in results.iter().enumerate() {
            csv_row(
                &mut *w,
                &[
                    &i.to_string(),
                    &render_decimal(&r.expected_change, DECIMAL_SIG),
                    &render_exact(&r.expected_change),
                    &render_decimal(&r.coalesce_prob, DECIMAL_SIG),
                    &render_decimal(&r.coalesce_bound, DECIMAL_SIG),
                    &r.steps_run.to_string(),
                    r.outcome,
                ],
            )?;
        }
    }

    writeln!(
        w,
        "# trials={} coalesced={} diverged={} budget_exhausted={}",
        args.trials, coalesced, diverged, exhausted
    )?;
    writeln!(
        w,
        "# mean_expected_change={} exact={}",
        render_decimal(&mean, DECIMAL_SIG),
        render_exact(&mean)
    )?;
    writeln!(w, "# stderr={stderr:.12}")?;
    writeln!(
        w,
        "# mean_coalesce_prob={} exact={}",
        render_decimal(&mean_coalesce, DECIMAL_SIG),
        render_exact(&mean_coalesce)
    )?;
    w.flush()?;
    Ok(())
}

fn run_trials(
    args: &CoupleScanArgs,
    spec: &GraphSpec,
    shared: Option<&Graph>,
    schedule: &FlipSchedule,
) -> Result<Vec<TrialStats>> {
    let trials = args.trials;
    let threads = crate::thread_count().min(trials);
    if threads <= 1 {
        return (0..trials)
            .map(|i| run_trial(spec, shared, args, schedule, i))
            .collect();
    }
    let mut slots: Vec<Option<Result<TrialStats>>> = (0..trials).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(threads);
        for worker in 0..threads {
            handles.push(scope.spawn(move || -> Vec<(usize, Result<TrialStats>)> {
                (worker..trials)
                    .step_by(threads)
                    .map(|i| (i, run_trial(spec, shared, args, schedule, i)))
                    .collect()
            }));
        }
        for handle in handles {
            for (i, r) in handle.join().expect("trial worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    // Scanning in trial order keeps error reporting deterministic too.
    slots
        .into_iter()
        .map(|slot| slot.expect("trial slot left unfilled"))
        .collect()
}

fn run_trial(
    spec: &GraphSpec,
    shared: Option<&Graph>,
    args: &CoupleScanArgs,
    schedule: &FlipSchedule,
    trial: usize,
) -> Result<TrialStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(trial as u64 + 1);
    let local;
    let g = match shared {
        Some(g) => g,
        None => {
            local = spec.build(&mut rng)?;
            &local
        }
    };
    let pair = random_neighboring_pair(g, args.k, &mut rng)?;

    // Exact one-step law of the coupling at the starting pair.
    let events = build_coupling(g, &pair, schedule)?;
    let mut expected_change = rat(0, 1);
    let mut coalesce_prob = rat(0, 1);
    for e in &events {
        if e.flip_x.is_none() && e.flip_y.is_none() {
            continue;
        }
        let x2 = apply(pair.x(), &e.flip_x)?;
        let y2 = apply(pair.y(), &e.flip_y)?;
        let h = hamming(&x2, &y2);
        expected_change += &e.probability * rat(h as i64 - 1, 1);
        if h == 0 {
            coalesce_prob += e.probability.clone();
        }
    }
    let coalesce_bound = identity_coalescence_bound(g, &pair);

    let (mut x, mut y) = (pair.x().clone(), pair.y().clone());
    let mut trajectory = Vec::new();
    if args.log_trajectories {
        trajectory.push(TrajPoint {
            step: 0,
            hamming: 1,
            bound: metric_upper_bound(g, &x, &y, schedule)?,
        });
    }
    let mut outcome = "budget_exhausted";
    let mut steps_run = args.steps;
    for t in 1..=args.steps {
        let (x2, y2) = coupled_step(g, &x, &y, schedule, &mut rng)?;
        x = x2;
        y = y2;
        let h = hamming(&x, &y);
        if args.log_trajectories {
            trajectory.push(TrajPoint {
                step: t,
                hamming: h,
                bound: metric_upper_bound(g, &x, &y, schedule)?,
            });
        }
        if h == 0 {
            outcome = "coalesced";
            steps_run = t;
            break;
        }
        if h > 1 {
            outcome = "diverged";
            steps_run = t;
            break;
        }
    }

    Ok(TrialStats {
        expected_change,
        coalesce_prob,
        coalesce_bound,
        steps_run,
        outcome,
        trajectory,
    })
}

fn apply(base: &Coloring, side: &Option<Cluster>) -> Result<Coloring> {
    Ok(match side {
        Some(cl) => flip(base, cl)?,
        None => base.clone(),
    })
}

/// Random proper coloring (greedy in vertex order, uniform among allowed
/// colors) plus a uniformly chosen disagreement vertex and alternative
/// color, both proper.
fn random_neighboring_pair<R: Rng + ?Sized>(
    g: &Graph,
    k: u32,
    rng: &mut R,
) -> Result<NeighboringPair> {
    let n = g.n();
    let mut colors = vec![0u32; n];
    for v in 0..n {
        let worn: Vec<u32> = g
            .neighbors(v)
            .iter()
            .filter(|&&u| u < v)
            .map(|&u| colors[u])
            .collect();
        let allowed: Vec<u32> = (1..=k).filter(|c| !worn.contains(c)).collect();
        if allowed.is_empty() {
            bail!("random proper coloring stuck at vertex {v}: k={k} too small");
        }
        colors[v] = allowed[rng.random_range(0..allowed.len())];
    }
    let mut candidates: Vec<(usize, Vec<u32>)> = Vec::new();
    for v in 0..n {
        let mut excluded: Vec<u32> = g.neighbors(v).iter().map(|&u| colors[u]).collect();
        excluded.push(colors[v]);
        let options: Vec<u32> = (1..=k).filter(|c| !excluded.contains(c)).collect();
        if !options.is_empty() {
            candidates.push((v, options));
        }
    }
    if candidates.is_empty() {
        bail!("no vertex admits a second proper color: k={k} leaves no neighboring pairs");
    }
    let (v, options) = &candidates[rng.random_range(0..candidates.len())];
    let cy = options[rng.random_range(0..options.len())];
    let x = Coloring::new(colors, k)?;
    Ok(NeighboringPair::from_base(x, *v, cy)?)
}

/// |A(v*)|/(nk): colors open at the disagreement vertex in both chains.
/// Each such color is a singleton-cluster flip on both sides that the
/// coupling pairs identically, so the exact coalescence mass is at least
/// this value.
fn identity_coalescence_bound(g: &Graph, pair: &NeighboringPair) -> Rat {
    let v = pair.vstar();
    let cx = pair.x().get(v);
    let cy = pair.y().get(v);
    let worn: HashSet<u32> = g.neighbors(v).iter().map(|&u| pair.x().get(u)).collect();
    let k = pair.x().k();
    let open = (1..=k)
        .filter(|&c| c != cx && c != cy && !worn.contains(&c))
        .count();
    rat(open as i64, (g.n() as i64) * i64::from(k))
}
