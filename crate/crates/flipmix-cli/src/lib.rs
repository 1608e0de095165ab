//! Command-line experiments on flip dynamics: chain sampling, exact
//! total-variation mixing curves, one-step coupling scans, and the full
//! contraction verification stack.
//!
//! Every command is a pure function of (config, seed): reruns produce
//! byte-identical output, including under different `FLIPMIX_THREADS`
//! settings, because trial aggregation sums exact rationals.

pub mod generators;
pub mod output;

mod couple_scan;
mod exact_mix;
mod sample;
mod verify;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use flipmix_core::{Coloring, FlipSchedule, Graph};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "flipmix",
    version,
    about = "Flip dynamics on proper k-colorings: sampling, exact mixing curves, coupling scans, certificate verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the flip chain from a greedy proper start and trace it to CSV.
    Sample(SampleArgs),
    /// Exact worst-start total-variation mixing curve by full enumeration.
    ExactMix(ExactMixArgs),
    /// One-step coupling statistics over random neighboring pairs.
    CoupleScan(CoupleScanArgs),
    /// Check the schedule certificate, case lemmas, maximizers, and
    /// contraction arithmetic; exit 0 iff everything passes.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Graph: path:<n>, cycle:<n>, star:<n>, tree:<n>[:<maxdeg>],
    /// regular:<n>:<d>, or an edge-list file.
    #[arg(long)]
    pub graph: String,

    /// Palette size (colors are 1..=k).
    #[arg(long)]
    pub k: u32,

    /// Flip schedule: preset name or JSON file.
    #[arg(long, default_value = "setting-1.1")]
    pub schedule: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Number of chain steps.
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,

    /// Also emit a row every this many steps (0 = final state only).
    #[arg(long, default_value_t = 0)]
    pub log_every: u64,

    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExactMixArgs {
    /// Graph spec or edge-list file (see `sample --help`).
    #[arg(long)]
    pub graph: String,

    #[arg(long)]
    pub k: u32,

    #[arg(long, default_value = "setting-1.1")]
    pub schedule: String,

    /// Seed (used only when the graph spec is a random generator).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Curve length; 0 doubles the horizon until TV <= 1/4.
    #[arg(long, default_value_t = 0)]
    pub t_max: usize,

    /// Hard cap on the auto-extended horizon.
    #[arg(long, default_value_t = 16_384)]
    pub max_steps: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoupleScanArgs {
    /// Graph spec or edge-list file. Random generators draw a fresh graph
    /// per trial; fixed specs share one graph across trials.
    #[arg(long)]
    pub graph: String,

    #[arg(long)]
    pub k: u32,

    #[arg(long, default_value = "setting-1.1")]
    pub schedule: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 1000)]
    pub trials: usize,

    /// Per-trial trajectory step budget.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,

    /// Emit per-step trajectory rows instead of per-trial summaries.
    #[arg(long)]
    pub log_trajectories: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Flip schedule: preset name or JSON file.
    #[arg(long, default_value = "setting-1.1")]
    pub schedule: String,

    /// Ratio k/Delta for the contraction arithmetic (exact rational or
    /// decimal, e.g. "1.8089" or "18089/10000").
    #[arg(long, default_value = "1.8089")]
    pub k_ratio: String,

    /// Maximum degree for the contraction arithmetic.
    #[arg(long, default_value_t = 125)]
    pub delta: usize,

    /// Emit a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

/// Dispatches a parsed command line; the return value is the process exit
/// code (commands other than `verify` fail only by erroring out).
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Sample(a) => sample::run(&a).map(|()| 0),
        Command::ExactMix(a) => exact_mix::run(&a).map(|()| 0),
        Command::CoupleScan(a) => couple_scan::run(&a).map(|()| 0),
        Command::Verify(a) => verify::run(&a),
    }
}

/// Resolves a schedule argument: preset name first, then JSON file.
pub fn resolve_schedule(spec: &str) -> Result<FlipSchedule> {
    if let Some(s) = FlipSchedule::preset(spec) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(spec).with_context(|| {
        format!(
            "schedule `{spec}` is not a preset ({}) and could not be read as a file",
            FlipSchedule::preset_names().join(", ")
        )
    })?;
    Ok(FlipSchedule::from_json_str(&text)?)
}

/// Worker count: FLIPMIX_THREADS if set, else available parallelism.
pub fn thread_count() -> usize {
    match std::env::var("FLIPMIX_THREADS") {
        Ok(v) => v.trim().parse::<usize>().unwrap_or(1).max(1),
        Err(_) => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    }
}

/// Greedy proper coloring: scan vertices in index order, give each the
/// smallest color unused by earlier neighbors. Succeeds whenever
/// k >= max_degree + 1.
pub fn greedy_coloring(g: &Graph, k: u32) -> Result<Coloring> {
    let mut colors = vec![0u32; g.n()];
    for v in 0..g.n() {
        let used: Vec<u32> = g
            .neighbors(v)
            .iter()
            .filter(|&&u| u < v)
            .map(|&u| colors[u])
            .collect();
        colors[v] = (1..=k)
            .find(|c| !used.contains(c))
            .with_context(|| format!("greedy start stuck at vertex {v}: k={k} too small"))?;
    }
    Ok(Coloring::new(colors, k)?)
}

/// Warns (stderr) when k is below the ergodicity threshold max_degree + 2.
pub fn warn_if_below_ergodic(g: &Graph, k: u32) {
    let threshold = g.max_degree() + 2;
    if (k as usize) < threshold {
        eprintln!(
            "warning: k = {k} is below the ergodicity threshold max_degree + 2 = {threshold}; \
             the chain may be reducible, running anyway"
        );
    }
}
