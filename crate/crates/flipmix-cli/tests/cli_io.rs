//! End-to-end checks on the `flipmix` binary: exit codes, output framing,
//! byte-level determinism across reruns and worker counts, and the CSV shape
//! each command promises.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flipmix"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "`flipmix {}` failed: {out:?}",
        args.join(" ")
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

/// Data rows of a CSV dump: comment lines and the column header stripped.
/// No emitted field contains a comma, so a plain split is faithful.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("flipmix-io-{}-{name}", std::process::id()))
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["sample", "exact-mix", "couple-scan", "verify"] {
        assert!(text.contains(sub), "--help must mention `{sub}`");
    }
}

#[test]
fn sample_reruns_are_byte_identical() {
    let args = [
        "sample",
        "--graph",
        "tree:10",
        "--k",
        "6",
        "--steps",
        "500",
        "--log-every",
        "50",
        "--seed",
        "5",
    ];
    let a = stdout_of(&args);
    let b = stdout_of(&args);
    assert_eq!(a, b, "same seed must reproduce the same bytes");

    let header = a.lines().next().unwrap();
    let hash = header
        .strip_prefix("# config=")
        .expect("first line carries run metadata")
        .split_whitespace()
        .next()
        .unwrap();
    assert_eq!(hash.len(), 16);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(header.contains(" seed=5 "));
    assert!(header.contains(" precision=12"));
    assert_eq!(a.lines().nth(1).unwrap(), "t,coloring,proper");

    // t=0, every 50th step except t=500, then the final state.
    assert_eq!(data_rows(&a).len(), 11);
}

#[test]
fn worker_count_never_changes_output() {
    let args = [
        "couple-scan",
        "--graph",
        "tree:12:5",
        "--k",
        "8",
        "--trials",
        "48",
        "--steps",
        "4",
        "--seed",
        "9",
    ];
    let one = bin().args(args).env("FLIPMIX_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("FLIPMIX_THREADS", "4").output().unwrap();
    assert!(one.status.success(), "single-worker run failed: {one:?}");
    assert!(four.status.success(), "four-worker run failed: {four:?}");
    assert_eq!(
        one.stdout, four.stdout,
        "worker count leaked into the output bytes"
    );

    let text = String::from_utf8(one.stdout).unwrap();
    assert!(
        text.lines().next().unwrap().contains("aggregation=exact-rational-sum"),
        "header must declare the order-independent aggregation"
    );
    assert!(text.contains("# trials=48 "));
    assert_eq!(data_rows(&text).len(), 48);
}

#[test]
fn verify_and_error_exit_codes() {
    assert_eq!(run(&["verify"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--k-ratio", "1.79"]).status.code(), Some(1));

    let truncated = temp_path("bad-schedule.json");
    std::fs::write(&truncated, "{\"P\": [\"1\", ").unwrap();
    let out = run(&["verify", "--schedule", truncated.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8(out.stderr).unwrap().contains("error:"),
        "parse failure must reach stderr"
    );
    std::fs::remove_file(&truncated).ok();

    let out_of_range = temp_path("oob-schedule.json");
    std::fs::write(&out_of_range, "{\"P\": [\"1\", \"2\"], \"eta\": \"0.5\"}").unwrap();
    assert_eq!(
        run(&["verify", "--schedule", out_of_range.to_str().unwrap()])
            .status
            .code(),
        Some(1),
        "flip probability above 1 must be rejected"
    );
    std::fs::remove_file(&out_of_range).ok();

    let out = run(&["sample", "--graph", "path:4", "--k", "6", "--schedule", "nosuch"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8(out.stderr).unwrap().contains("setting-1.1"),
        "unknown schedule error must list the preset names"
    );

    let out = run(&["sample", "--graph", "regular:5:3", "--k", "6", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(1), "odd degree sum must be rejected");
}

#[test]
fn small_palette_warns_but_runs() {
    let out = run(&[
        "sample",
        "--graph",
        "star:5",
        "--k",
        "3",
        "--steps",
        "200",
        "--log-every",
        "20",
        "--seed",
        "2",
    ]);
    assert!(out.status.success());
    assert!(
        String::from_utf8(out.stderr)
            .unwrap()
            .contains("ergodicity threshold"),
        "k below max_degree + 2 must warn"
    );
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    assert!(!rows.is_empty());
    for r in &rows {
        assert_eq!(r.len(), 3);
        assert_eq!(r[2], "true", "every emitted state stays proper");
    }
}

#[test]
fn edge_samples_match_uniform_marginals() {
    let text = stdout_of(&[
        "sample",
        "--graph",
        "path:2",
        "--k",
        "3",
        "--steps",
        "100000",
        "--log-every",
        "10",
        "--seed",
        "7",
    ]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 10_001);
    let mut counts = [0u32; 3];
    for r in &rows {
        assert_eq!(r[2], "true");
        let colors: Vec<u32> = r[1].split(' ').map(|c| c.parse().unwrap()).collect();
        assert_eq!(colors.len(), 2);
        assert_ne!(colors[0], colors[1]);
        counts[(colors[0] - 1) as usize] += 1;
    }
    // The chain is doubly stochastic, so the stationary law is uniform over
    // the six proper states and each color holds vertex 0 a third of the time.
    for (c, &n) in counts.iter().enumerate() {
        let freq = f64::from(n) / rows.len() as f64;
        assert!(
            (freq - 1.0 / 3.0).abs() < 0.04,
            "color {} frequency {freq} strays from 1/3",
            c + 1
        );
    }
}

#[test]
fn coalesce_probability_dominates_reported_bound() {
    let text = stdout_of(&[
        "couple-scan",
        "--graph",
        "cycle:8",
        "--k",
        "5",
        "--trials",
        "60",
        "--steps",
        "0",
        "--seed",
        "11",
    ]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 60);
    let mut positive = 0usize;
    for r in &rows {
        assert_eq!(r.len(), 7);
        let prob: f64 = r[3].parse().unwrap();
        let bound: f64 = r[4].parse().unwrap();
        assert!(
            prob >= bound - 1e-9,
            "trial {}: coalesce_prob {prob} under its identity bound {bound}",
            r[0]
        );
        if bound > 0.0 {
            positive += 1;
        }
    }
    assert!(positive > 0, "identity bound must not be vacuously zero");
    assert!(text.contains("# mean_coalesce_prob="));
    assert!(text.contains("# stderr="));
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let args = [
        "exact-mix",
        "--graph",
        "cycle:4",
        "--k",
        "4",
        "--t-max",
        "6",
        "--seed",
        "3",
    ];
    let on_stdout = stdout_of(&args);
    assert!(on_stdout.contains("# states=84"));

    let path = temp_path("exact-mix.csv");
    let out = bin()
        .args(args)
        .args(["--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "--out must silence stdout");
    let from_file = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(on_stdout, from_file);
}
