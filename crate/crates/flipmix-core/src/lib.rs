//! Flip dynamics for sampling proper k-colorings of bounded-degree graphs.
//!
//! The library implements the single-site cluster chain ("flip dynamics"),
//! a greedy one-step coupling for neighboring coloring pairs, a weighted
//! Hamming metric driven by unblocked-neighbor counts, and an exact rational
//! verifier that re-derives every contraction bound by brute-force
//! enumeration. All probability bookkeeping is exact (`BigRational`);
//! floating point appears only in Monte-Carlo sampling and mixing curves.

pub mod analyzer;
pub mod blocking;
pub mod cluster;
pub mod coupling;
pub mod dynamics;
pub mod graph;
pub mod rational;
pub mod schedule;

pub use analyzer::{
    estimate_block_transitions, realize_on_tree, theorem_arithmetic, tree_charge_comparison,
    verify_case_lemmas, verify_maximizers, z_tilde_value, z_value, AnalysisParams,
    BlockTransitionReport, CaseFamily, CaseLemmaReport, CaseViolation, ColorTransitionStats,
    ContractionReport, MaximizerReport,
};
pub use blocking::{
    blocking_count, classify, color_neighborhood, exact_path_metric, metric_neighboring,
    metric_upper_bound, BlockProfile, ColorNeighborhood,
};
pub use cluster::{all_clusters, cluster, cluster_bounded, flip, Cluster, DEFAULT_SIZE_CUTOFF};
pub use coupling::{
    build_coupling, color_config, coupled_step, expected_hamming_change,
    expected_hamming_change_restricted, expected_metric_change, l_set, sample_event, ColorConfig,
    EventKind, JointEvent,
};
pub use dynamics::{
    flip_step, glauber_step, transition_matrix, transition_row, TransitionMatrix,
};
pub use graph::{
    enumerate_all_labelings, enumerate_proper_colorings, hamming, is_proper, load_graph, Coloring,
    Graph, NeighboringPair,
};
pub use rational::{
    parse_rational, rat, render_decimal, render_exact, round_down_at, round_up_at, to_f64, Rat,
};
pub use schedule::{
    validate_schedule, FlipSchedule, PropertyCheck, PropertyStatus, ValidationReport,
};

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    #[error("state space budget exceeded: {required} states, budget {budget}")]
    Budget { required: u128, budget: u128 },

    #[error(
        "stale cluster: vertex {vertex} is colored {found}, cluster expects {expected_from} or {expected_to}"
    )]
    StaleCluster {
        vertex: usize,
        found: u32,
        expected_from: u32,
        expected_to: u32,
    },

    #[error("state space not closed: flipping move (v={vertex}, c={color}) from state {state} leaves the provided space")]
    NotClosed {
        state: usize,
        vertex: usize,
        color: u32,
    },

    #[error("chain is reducible from the start state: {unreachable} of {total} states unreachable (first: {first_unreachable})")]
    Reducible {
        unreachable: usize,
        total: usize,
        first_unreachable: usize,
    },

    #[error("coupling marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("inconsistent configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
