//! Exact certification of the one-step contraction argument: the
//! per-color expected-change functionals, exhaustive case checks over
//! small neighborhood configurations, maximizer searches, the aggregate
//! margin arithmetic, and falsification checks for the block-transition
//! inequalities on concrete instances.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::blocking::{color_neighborhood, unblocked_count_general, unblocked_neighbors};
use crate::cluster::{flip, Cluster};
#[cfg(any(debug_assertions, test))]
use crate::coupling::color_config;
use crate::coupling::{
    build_coupling, expected_hamming_change_restricted, l_set, ColorConfig, JointEvent,
};
use crate::graph::{Coloring, Graph, NeighboringPair};
use crate::rational::{rat, render_decimal, render_exact, round_down_at, round_up_at, to_f64, Rat};
use crate::schedule::{validate_schedule, FlipSchedule, PropertyCheck, PropertyStatus};
use crate::{Error, Result};

fn ri(v: usize) -> Rat {
    rat(v as i64, 1)
}

fn rmax(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

/// Ratio threshold the aggregate argument targets.
fn ratio_threshold() -> Rat {
    rat(18089, 10000)
}

/// Rounded per-neighbor coefficient used for colors worn three or more
/// times in the disagreement neighborhood.
fn heavy_literal() -> Rat {
    rat(71, 40)
}

/// Multiplicative slack reserved by the contraction target.
fn contraction_slack() -> Rat {
    rat(1, 100_000)
}

/// Above this palette ratio the chain is handled by older arguments.
fn classical_ratio() -> Rat {
    rat(11, 6)
}

fn check_le(label: impl Into<String>, lhs: &Rat, rhs: &Rat, statement: String) -> PropertyCheck {
    let status = match lhs.cmp(rhs) {
        std::cmp::Ordering::Less => PropertyStatus::HoldsStrict,
        std::cmp::Ordering::Equal => PropertyStatus::HoldsWithEquality,
        std::cmp::Ordering::Greater => PropertyStatus::Violated,
    };
    PropertyCheck {
        label: label.into(),
        statement,
        status,
    }
}

fn check_eq(label: impl Into<String>, lhs: &Rat, rhs: &Rat, statement: String) -> PropertyCheck {
    let status = if lhs == rhs {
        PropertyStatus::HoldsWithEquality
    } else {
        PropertyStatus::Violated
    };
    PropertyCheck {
        label: label.into(),
        statement,
        status,
    }
}

fn render_checks(out: &mut String, checks: &[PropertyCheck]) {
    for check in checks {
        let mark = match check.status {
            PropertyStatus::HoldsStrict => "ok ",
            PropertyStatus::HoldsWithEquality => "ok=",
            PropertyStatus::Violated => "VIOLATED",
        };
        out.push_str(&format!(
            "  {:<9} {:<10} {}\n",
            mark, check.label, check.statement
        ));
    }
}

fn checks_json(checks: &[PropertyCheck]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| {
                json!({
                    "label": c.label,
                    "statement": c.statement,
                    "holds": c.holds(),
                    "equality": c.status == PropertyStatus::HoldsWithEquality,
                })
            })
            .collect(),
    )
}

/// Exact inputs for the contraction analysis. The palette size is kept
/// as a rational so ratio-anchored instances like 1.8089 times the
/// degree bound stay exact; `delta1` and `delta2` are the ambient counts
/// of disagreement-neighborhood members whose color appears once or
/// twice there.
#[derive(Debug, Clone)]
pub struct AnalysisParams {
    pub k: Rat,
    pub delta: usize,
    pub delta1: usize,
    pub delta2: usize,
    pub schedule: FlipSchedule,
}

impl AnalysisParams {
    pub fn new(
        k: Rat,
        delta: usize,
        delta1: usize,
        delta2: usize,
        schedule: FlipSchedule,
    ) -> Result<Self> {
        if delta == 0 {
            return Err(Error::Config("degree bound must be positive".into()));
        }
        if !k.is_positive() {
            return Err(Error::Config(format!(
                "palette size must be positive, got {}",
                render_exact(&k)
            )));
        }
        if delta1 + delta2 > delta {
            return Err(Error::Config(format!(
                "ambient counts {delta1} + {delta2} exceed the degree bound {delta}"
            )));
        }
        Ok(AnalysisParams {
            k,
            delta,
            delta1,
            delta2,
            schedule,
        })
    }

    /// Instance anchored at `k = ratio * delta` with empty ambient counts.
    pub fn from_ratio(ratio: &Rat, delta: usize, schedule: FlipSchedule) -> Result<Self> {
        Self::new(ratio * ri(delta), delta, 0, 0, schedule)
    }

    pub fn ratio(&self) -> Rat {
        &self.k / ri(self.delta)
    }

    /// Colors assuredly free around any single vertex: k - delta - 2.
    pub fn alpha(&self) -> Rat {
        &self.k - ri(self.delta + 2)
    }

    /// Recolor-exposure weight for the ambient counts.
    pub fn beta(&self) -> Rat {
        self.beta_at(self.delta1 + self.delta2)
    }

    /// Same weight with an explicit count of once-or-twice colors:
    /// k - P_2 * d12 + (1 + P_2) * delta. Decreasing in d12.
    pub fn beta_at(&self, d12: usize) -> Rat {
        let p2 = self.schedule.probability(2);
        &self.k - &p2 * ri(d12) + (rat(1, 1) + &p2) * ri(self.delta)
    }
}

/// Worst-case expected number of fresh disagreements, scaled by n*k,
/// that the coupled step charges to one neighborhood color: the two
/// endpoint clusters pay for everything their paired class does not
/// cover, and each neighbor class pays its size times its leftover flip
/// weight, with a single unit of overlap credited per joint flip.
pub fn z_value(cfg: &ColorConfig, s: &FlipSchedule) -> Result<Rat> {
    let suma: usize = cfg.a.iter().sum();
    let sumb: usize = cfg.b.iter().sum();
    if cfg.big_a != 1 + suma || cfg.big_b != 1 + sumb {
        return Err(Error::Config(format!(
            "cluster totals disagree with the entries: A = {} vs 1+{suma}, B = {} vs 1+{sumb}",
            cfg.big_a, cfg.big_b
        )));
    }
    if cfg.i_max >= cfg.d_c || cfg.i_prime_max >= cfg.d_c {
        return Err(Error::Config("paired index out of range".into()));
    }
    let pa = s.probability(cfg.big_a);
    let pb = s.probability(cfg.big_b);
    let mut total = ri(cfg.big_a - cfg.a[cfg.i_max] - 1) * &pa
        + ri(cfg.big_b - cfg.b[cfg.i_prime_max] - 1) * &pb;
    for i in 0..cfg.d_c {
        let mut q = s.probability(cfg.a[i]);
        if i == cfg.i_max {
            q -= &pa;
        }
        let mut qp = s.probability(cfg.b[i]);
        if i == cfg.i_prime_max {
            qp -= &pb;
        }
        let smaller = if q <= qp { q.clone() } else { qp.clone() };
        total += ri(cfg.a[i]) * q + ri(cfg.b[i]) * qp - smaller;
    }
    Ok(total)
}

/// `z_value` plus the metric credits: unblocked neighbors are charged
/// the recolor-exposure weight and singly blocked neighbors are credited
/// the free-color weight, both per unit of degree bound.
pub fn z_tilde_value(cfg: &ColorConfig, params: &AnalysisParams) -> Result<Rat> {
    if cfg.d0 + cfg.d1 + cfg.d2plus != cfg.d_c {
        return Err(Error::Config(
            "blocking census must cover every neighbor exactly once".into(),
        ));
    }
    let base = z_value(cfg, &params.schedule)?;
    let eta = params.schedule.eta().clone();
    let dl = ri(params.delta);
    Ok(base + ri(cfg.d0) * &eta * params.beta() / &dl - ri(cfg.d1) * &eta * params.alpha() / &dl)
}

/// Class-size vectors with `d_c` entries in 1..=cap, plus the swallowed
/// variants: a later neighbor may sit inside an earlier class of size at
/// least 3, recorded as a zero entry.
fn shapes(d_c: usize, cap: usize) -> Vec<Vec<usize>> {
    match d_c {
        1 => (1..=cap).map(|v| vec![v]).collect(),
        2 => {
            let mut out = Vec::new();
            for first in 1..=cap {
                for second in 0..=cap {
                    if second == 0 && first < 3 {
                        continue;
                    }
                    out.push(vec![first, second]);
                }
            }
            out
        }
        _ => panic!("shape enumeration covers one or two neighbors"),
    }
}

fn census_options(d_c: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for d0 in 0..=d_c {
        for d1 in 0..=(d_c - d0) {
            out.push((d0, d1, d_c - d0 - d1));
        }
    }
    out
}

fn overlaps_for(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| if x == 0 || y == 0 { 0 } else { 1 })
        .collect()
}

/// Every validated configuration with one or two same-colored neighbors
/// and class sizes up to `cap`, across all achievable blocking censuses.
fn enumerate_configs(cap: usize) -> Vec<ColorConfig> {
    let mut out = Vec::new();
    for d_c in 1..=2 {
        for a in shapes(d_c, cap) {
            for b in shapes(d_c, cap) {
                let m = overlaps_for(&a, &b);
                for (d0, d1, d2) in census_options(d_c) {
                    if let Ok(cfg) = ColorConfig::new(3, a.clone(), b.clone(), m.clone(), d0, d1, d2)
                    {
                        out.push(cfg);
                    }
                }
            }
        }
    }
    out
}

/// One configuration that broke a case inequality, with both sides.
#[derive(Debug, Clone)]
pub struct CaseViolation {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub census: (usize, usize, usize),
    pub bound: String,
    pub lhs: Rat,
    pub rhs: Rat,
}

/// Per-family summary of one case inequality over the enumeration.
#[derive(Debug, Clone)]
pub struct CaseFamily {
    pub label: String,
    pub lambda: Rat,
    pub configs: usize,
    pub worst_slack: Rat,
    pub worst_a: Vec<usize>,
    pub worst_b: Vec<usize>,
    pub worst_census: (usize, usize, usize),
}

impl CaseFamily {
    fn new(label: &str) -> Self {
        CaseFamily {
            label: label.to_string(),
            lambda: Rat::zero(),
            configs: 0,
            worst_slack: Rat::zero(),
            worst_a: Vec::new(),
            worst_b: Vec::new(),
            worst_census: (0, 0, 0),
        }
    }

    fn record(&mut self, slack: &Rat, cfg: &ColorConfig, lambda: &Rat) {
        if self.configs == 0 || *slack < self.worst_slack {
            self.worst_slack = slack.clone();
            self.worst_a = cfg.a.clone();
            self.worst_b = cfg.b.clone();
            self.worst_census = (cfg.d0, cfg.d1, cfg.d2plus);
            self.lambda = lambda.clone();
        }
        self.configs += 1;
    }

    pub fn tight(&self) -> bool {
        self.worst_slack.is_zero()
    }
}

/// Outcome of the exhaustive case check: the schedule certificate, the
/// two standing hypotheses, one family per census shape, the wide-color
/// term bounds, and any violated configurations.
#[derive(Debug, Clone)]
pub struct CaseLemmaReport {
    pub certificate: crate::schedule::ValidationReport,
    pub hypotheses: Vec<PropertyCheck>,
    pub families: Vec<CaseFamily>,
    pub termwise: Vec<PropertyCheck>,
    pub heavy_coefficient: Rat,
    pub heavy_literal_holds: bool,
    pub configs_checked: usize,
    pub violations: Vec<CaseViolation>,
}

impl CaseLemmaReport {
    pub fn all_pass(&self) -> bool {
        self.violations.is_empty()
            && self.heavy_literal_holds
            && self.hypotheses.iter().all(PropertyCheck::holds)
            && self.termwise.iter().all(PropertyCheck::holds)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "case enumeration over {} configurations (class sizes 1..=8 plus swallowed entries)\n",
            self.configs_checked
        ));
        out.push_str("hypotheses:\n");
        render_checks(&mut out, &self.hypotheses);
        out.push_str(&format!(
            "{:<16} {:>12} {:>8} {:>16}  worst configuration\n",
            "family", "coefficient", "configs", "worst slack"
        ));
        for f in &self.families {
            out.push_str(&format!(
                "{:<16} {:>12} {:>8} {:>16}  a={:?} b={:?} census={:?}{}\n",
                f.label,
                render_decimal(&f.lambda, 10),
                f.configs,
                render_decimal(&f.worst_slack, 10),
                f.worst_a,
                f.worst_b,
                f.worst_census,
                if f.tight() { "  (tight)" } else { "" }
            ));
        }
        out.push_str("wide-color term bounds (three or more same-colored neighbors):\n");
        render_checks(&mut out, &self.termwise);
        out.push_str(&format!(
            "heavy coefficient {} = {} <= 1.775: {}\n",
            render_exact(&self.heavy_coefficient),
            render_decimal(&self.heavy_coefficient, 10),
            if self.heavy_literal_holds { "ok" } else { "VIOLATED" }
        ));
        if self.violations.is_empty() {
            out.push_str("violations: none\n");
        } else {
            out.push_str(&format!("violations: {}\n", self.violations.len()));
            for v in &self.violations {
                out.push_str(&format!(
                    "  a={:?} b={:?} census={:?} bound={} lhs={} rhs={}\n",
                    v.a,
                    v.b,
                    v.census,
                    v.bound,
                    render_decimal(&v.lhs, 10),
                    render_decimal(&v.rhs, 10)
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "configs_checked": self.configs_checked,
            "all_pass": self.all_pass(),
            "hypotheses": checks_json(&self.hypotheses),
            "families": self.families.iter().map(|f| json!({
                "label": f.label,
                "coefficient": render_exact(&f.lambda),
                "configs": f.configs,
                "worst_slack": render_exact(&f.worst_slack),
                "worst_a": f.worst_a,
                "worst_b": f.worst_b,
                "worst_census": [f.worst_census.0, f.worst_census.1, f.worst_census.2],
                "tight": f.tight(),
            })).collect::<Vec<_>>(),
            "termwise": checks_json(&self.termwise),
            "heavy_coefficient": render_exact(&self.heavy_coefficient),
            "heavy_literal_holds": self.heavy_literal_holds,
            "violations": self.violations.iter().map(|v| json!({
                "a": v.a, "b": v.b,
                "census": [v.census.0, v.census.1, v.census.2],
                "bound": v.bound,
                "lhs": render_exact(&v.lhs),
                "rhs": render_exact(&v.rhs),
            })).collect::<Vec<_>>(),
        })
    }
}

fn reduced_unblocked(s: &FlipSchedule) -> Rat {
    rat(2, 1) - s.probability(2)
}

fn reduced_singly(s: &FlipSchedule) -> Rat {
    rat(2, 1) - s.probability(3)
}

fn reduced_multi(s: &FlipSchedule) -> Rat {
    rat(2, 1) - s.probability(2) + rat(2, 1) * (s.probability(3) - s.probability(4))
}

/// The two constant branch coefficients of the overall per-unit bound.
fn constant_branch(params: &AnalysisParams) -> Rat {
    let s = &params.schedule;
    let singly = reduced_singly(s) - s.eta() * params.alpha() / ri(params.delta);
    rmax(singly, reduced_multi(s))
}

fn unblocked_branch(params: &AnalysisParams, d12: usize) -> Rat {
    reduced_unblocked(&params.schedule)
        + params.schedule.eta() * params.beta_at(d12) / ri(params.delta)
}

/// Minimum slack of the overall mixed-census bound over the admissible
/// integer values of the ambient once-or-twice count. The gap is concave
/// piecewise affine in that count, so the endpoints and the branch
/// crossover bracket the integer minimum.
fn mixture_slack(cfg: &ColorConfig, params: &AnalysisParams, z: &Rat) -> (Rat, usize, Rat) {
    let lo = cfg.d_c;
    let hi = params.delta;
    let mut candidates: BTreeSet<usize> = [lo, hi].into_iter().collect();
    let s = &params.schedule;
    let p2 = s.probability(2);
    let eta = s.eta().clone();
    let cbranch = constant_branch(params);
    if !p2.is_zero() && !eta.is_zero() {
        // unblocked branch equals the constant branch at
        // beta = (cbranch - 2 + P_2) * delta / eta.
        let beta_target = (&cbranch - rat(2, 1) + &p2) * ri(params.delta) / &eta;
        let crossing = (&params.k + (rat(1, 1) + &p2) * ri(params.delta) - beta_target) / &p2;
        let clamped = crossing.max(ri(lo)).min(ri(hi));
        let fl = clamped.floor().to_integer();
        for v in [fl.clone(), fl + 1u32] {
            if let Ok(u) = usize::try_from(&v) {
                if u >= lo && u <= hi {
                    candidates.insert(u);
                }
            }
        }
    }
    let dl = ri(params.delta);
    let alpha_term = ri(cfg.d1) * &eta * params.alpha() / &dl;
    let mut best: Option<(Rat, usize, Rat)> = None;
    for &d12 in &candidates {
        let lambda = rmax(unblocked_branch(params, d12), cbranch.clone());
        let lhs = z + ri(cfg.d0) * &eta * params.beta_at(d12) / &dl - &alpha_term;
        let rhs = rat(-1, 1) + ri(cfg.d_c) * &lambda;
        let slack = rhs - lhs;
        if best.as_ref().is_none_or(|(b, _, _)| slack < *b) {
            best = Some((slack, d12, lambda));
        }
    }
    best.expect("candidate set is never empty")
}

/// Checks each term bound the wide-color argument relies on, exactly
/// over the full support of the schedule, plus the closing arithmetic
/// that converts them into the per-unit coefficient.
fn wide_color_checks(s: &FlipSchedule, heavy: &Rat) -> Vec<PropertyCheck> {
    let mut checks = Vec::new();
    let top = s.support().max(6);
    let two_p4 = rat(2, 1) * s.probability(4);
    for j in 4..=top {
        let lhs = ri(j - 2) * s.probability(j);
        checks.push(check_le(
            format!("HC1(j={j})"),
            &lhs,
            &two_p4,
            format!(
                "({})P_{j} = {} <= 2 P_4 = {}: endpoint-cluster surcharge",
                j - 2,
                render_exact(&lhs),
                render_exact(&two_p4)
            ),
        ));
    }
    let one = rat(1, 1);
    for j in 1..=top {
        let lhs = ri(j) * s.probability(j);
        checks.push(check_le(
            format!("HC2(j={j})"),
            &lhs,
            &one,
            format!(
                "{j} P_{j} = {} <= 1: size-weighted flip mass per class",
                render_exact(&lhs)
            ),
        ));
    }
    let p2 = s.probability(2);
    for j in 2..=top {
        let lhs = ri(j - 1) * s.probability(j);
        checks.push(check_le(
            format!("HC3(j={j})"),
            &lhs,
            &p2,
            format!(
                "({})P_{j} = {} <= P_2 = {}: reduced leftover of a blocked class",
                j - 1,
                render_exact(&lhs),
                render_exact(&p2)
            ),
        ));
    }
    for j in (top + 1)..=18 {
        let pj = s.probability(j);
        checks.push(check_eq(
            format!("ZT(j={j})"),
            &pj,
            &Rat::zero(),
            format!("P_{j} = {}: classes this wide add no flip mass", render_exact(&pj)),
        ));
    }
    // Size appears linearly against gap terms, so widening a class past
    // the enumeration cap changes nothing once every gap this wide is 0.
    for j in (top + 1)..=17 {
        let gap = ri(j - 1) * s.gap(j);
        checks.push(check_eq(
            format!("TW(j={j})"),
            &gap,
            &Rat::zero(),
            format!(
                "({})(P_{j} - P_{}) = {}: size-weighted gap vanishes past the cap",
                j - 1,
                j + 1,
                render_exact(&gap)
            ),
        ));
    }
    // Per-neighbor totals: 1 for an unblocked neighbor, 1 + P_2 for a
    // blocked one, plus 4 P_4 from the endpoint clusters, meet the
    // per-unit coefficient exactly at three neighbors and fall behind it
    // beyond that.
    let at_three = rat(3, 1) * (rat(1, 1) + &p2) + rat(4, 1) * s.probability(4);
    let closing = rat(-1, 1) + rat(3, 1) * heavy;
    checks.push(check_eq(
        "HC4",
        &at_three,
        &closing,
        format!(
            "3(1+P_2) + 4 P_4 = {} meets the coefficient bound exactly at three neighbors",
            render_exact(&at_three)
        ),
    ));
    let slope_lhs = rat(1, 1) + &p2;
    checks.push(check_le(
        "HC5",
        &slope_lhs,
        heavy,
        format!(
            "1 + P_2 = {} <= coefficient {}: each extra neighbor keeps the bound",
            render_exact(&slope_lhs),
            render_exact(heavy)
        ),
    ));
    checks
}

/// Exhaustive check of the per-color case bounds. Refuses schedules that
/// fail their certificate and instances where the standing hypotheses
/// (nonnegative free-color weight, recolor exposure at most P_2) fail,
/// then enumerates every configuration with one or two same-colored
/// neighbors, class sizes up to 8, both swallow patterns, and every
/// achievable blocking census. Sizes past the cap carry no flip mass, so
/// the enumeration is complete.
pub fn verify_case_lemmas(params: &AnalysisParams) -> Result<CaseLemmaReport> {
    let certificate = validate_schedule(&params.schedule);
    if !certificate.all_pass() {
        let names: Vec<String> = certificate
            .violations()
            .iter()
            .map(|c| c.label.clone())
            .collect();
        return Err(Error::Hypothesis(format!(
            "schedule certificate failed: {}",
            names.join(", ")
        )));
    }
    let s = &params.schedule;
    let alpha = params.alpha();
    if alpha.is_negative() {
        return Err(Error::Hypothesis(format!(
            "need k >= degree bound + 2 so the free-color weight is nonnegative \
             (k = {}, degree bound = {})",
            render_exact(&params.k),
            params.delta
        )));
    }
    let p2 = s.probability(2);
    let exposure = s.eta() * params.beta_at(0) / ri(params.delta);
    if exposure > p2 {
        return Err(Error::Hypothesis(format!(
            "recolor exposure eta*beta/delta = {} exceeds P_2 = {} at the emptiest neighborhood",
            render_exact(&exposure),
            render_exact(&p2)
        )));
    }
    let hypotheses = vec![
        check_le(
            "ALPHA",
            &Rat::zero(),
            &alpha,
            format!(
                "0 <= k - delta - 2 = {}: free-color weight",
                render_exact(&alpha)
            ),
        ),
        check_le(
            "EXPOSURE",
            &exposure,
            &p2,
            format!(
                "eta*beta/delta = {} <= P_2 = {} at the emptiest neighborhood",
                render_exact(&exposure),
                render_exact(&p2)
            ),
        ),
    ];

    let lam_u = reduced_unblocked(s);
    let lam_s = reduced_singly(s);
    let lam_m = reduced_multi(s);
    let mut fam_u = CaseFamily::new("unblocked");
    let mut fam_s = CaseFamily::new("singly blocked");
    let mut fam_m = CaseFamily::new("multiblocked");
    let mut fam_mixed = CaseFamily::new("mixed census");
    let mut violations = Vec::new();
    let configs = enumerate_configs(8);
    let mut checked = 0usize;
    for cfg in &configs {
        if cfg.d_c > params.delta {
            continue;
        }
        checked += 1;
        let z = z_value(cfg, s)?;
        let d = ri(cfg.d_c);
        let pure = if cfg.d0 == cfg.d_c {
            Some((&mut fam_u, &lam_u, "unblocked"))
        } else if cfg.d1 == cfg.d_c {
            Some((&mut fam_s, &lam_s, "singly blocked"))
        } else if cfg.d2plus == cfg.d_c {
            Some((&mut fam_m, &lam_m, "multiblocked"))
        } else {
            None
        };
        let is_mixed = pure.is_none();
        if let Some((family, lambda, label)) = pure {
            // The metric credits cancel against the branch coefficient
            // for a pure census, leaving a schedule-only inequality.
            let rhs = rat(-1, 1) + &d * lambda;
            let slack = &rhs - &z;
            family.record(&slack, cfg, lambda);
            if slack.is_negative() {
                violations.push(CaseViolation {
                    a: cfg.a.clone(),
                    b: cfg.b.clone(),
                    census: (cfg.d0, cfg.d1, cfg.d2plus),
                    bound: label.to_string(),
                    lhs: z.clone(),
                    rhs,
                });
            }
        }
        let (slack, _, lambda) = mixture_slack(cfg, params, &z);
        if is_mixed {
            fam_mixed.record(&slack, cfg, &lambda);
        }
        if slack.is_negative() {
            violations.push(CaseViolation {
                a: cfg.a.clone(),
                b: cfg.b.clone(),
                census: (cfg.d0, cfg.d1, cfg.d2plus),
                bound: if is_mixed {
                    "overall (mixed census)".to_string()
                } else {
                    "overall (pure census)".to_string()
                },
                lhs: rat(-1, 1) + ri(cfg.d_c) * &lambda - &slack,
                rhs: rat(-1, 1) + ri(cfg.d_c) * &lambda,
            });
        }
    }

    let heavy = rat(4, 3) + &p2 + rat(4, 3) * s.probability(4);
    let termwise = wide_color_checks(s, &heavy);
    let heavy_literal_holds = heavy <= heavy_literal();
    Ok(CaseLemmaReport {
        certificate,
        hypotheses,
        families: vec![fam_u, fam_s, fam_m, fam_mixed],
        termwise,
        heavy_coefficient: heavy,
        heavy_literal_holds,
        configs_checked: checked,
        violations,
    })
}

/// Outcome of the maximizer searches over small configurations.
#[derive(Debug, Clone)]
pub struct MaximizerReport {
    pub d1_max: Rat,
    pub d1_argmax: (usize, usize),
    pub d1_stated: Rat,
    pub d1_claim_holds: bool,
    pub d1_restricted_max: Rat,
    pub d1_restricted_argmax: (usize, usize),
    pub d1_restricted_stated: Rat,
    pub d1_restricted_claim_holds: bool,
    pub d2_max: Rat,
    pub d2_argmax: (Vec<usize>, Vec<usize>),
    pub d2_region_max: Rat,
    pub d2_claim_holds: bool,
    pub d2_multi_max: Rat,
    pub d2_multi_argmax: (Vec<usize>, Vec<usize>),
    pub d2_multi_stated: Rat,
    pub d2_multi_claim_holds: bool,
    pub configs_checked: usize,
}

impl MaximizerReport {
    pub fn all_pass(&self) -> bool {
        self.d1_claim_holds
            && self.d1_restricted_claim_holds
            && self.d2_claim_holds
            && self.d2_multi_claim_holds
    }

    pub fn render_text(&self) -> String {
        let mark = |ok: bool| if ok { "ok" } else { "MISMATCH" };
        let mut out = String::new();
        out.push_str(&format!(
            "maximizer search over {} configurations\n",
            self.configs_checked
        ));
        out.push_str(&format!(
            "one neighbor: max {} at (a,b) = {:?}; stated (1,2) gives {}: {}\n",
            render_decimal(&self.d1_max, 10),
            self.d1_argmax,
            render_decimal(&self.d1_stated, 10),
            mark(self.d1_claim_holds)
        ));
        out.push_str(&format!(
            "one neighbor, wide second class (b >= 3): max {} at {:?}; stated (1,3) gives {}: {}\n",
            render_decimal(&self.d1_restricted_max, 10),
            self.d1_restricted_argmax,
            render_decimal(&self.d1_restricted_stated, 10),
            mark(self.d1_restricted_claim_holds)
        ));
        out.push_str(&format!(
            "two neighbors: max {} at a={:?} b={:?}; unit-a small-b region reaches {}: {}\n",
            render_decimal(&self.d2_max, 10),
            self.d2_argmax.0,
            self.d2_argmax.1,
            render_decimal(&self.d2_region_max, 10),
            mark(self.d2_claim_holds)
        ));
        out.push_str(&format!(
            "two neighbors, all multiblocked: max {} at a={:?} b={:?}; stated value {}: {}\n",
            render_decimal(&self.d2_multi_max, 10),
            self.d2_multi_argmax.0,
            self.d2_multi_argmax.1,
            render_decimal(&self.d2_multi_stated, 10),
            mark(self.d2_multi_claim_holds)
        ));
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "configs_checked": self.configs_checked,
            "all_pass": self.all_pass(),
            "d1": {
                "max": render_exact(&self.d1_max),
                "argmax": [self.d1_argmax.0, self.d1_argmax.1],
                "stated": render_exact(&self.d1_stated),
                "holds": self.d1_claim_holds,
            },
            "d1_restricted": {
                "max": render_exact(&self.d1_restricted_max),
                "argmax": [self.d1_restricted_argmax.0, self.d1_restricted_argmax.1],
                "stated": render_exact(&self.d1_restricted_stated),
                "holds": self.d1_restricted_claim_holds,
            },
            "d2": {
                "max": render_exact(&self.d2_max),
                "argmax_a": self.d2_argmax.0,
                "argmax_b": self.d2_argmax.1,
                "region_max": render_exact(&self.d2_region_max),
                "holds": self.d2_claim_holds,
            },
            "d2_multiblocked": {
                "max": render_exact(&self.d2_multi_max),
                "argmax_a": self.d2_multi_argmax.0,
                "argmax_b": self.d2_multi_argmax.1,
                "stated": render_exact(&self.d2_multi_stated),
                "holds": self.d2_multi_claim_holds,
            },
        })
    }
}

fn d1_config(s: usize, t: usize) -> ColorConfig {
    for (d0, d1, d2) in census_options(1) {
        if let Ok(cfg) = ColorConfig::new(3, vec![s], vec![t], vec![1], d0, d1, d2) {
            return cfg;
        }
    }
    unreachable!("every size pair admits a census")
}

/// Searches every small configuration for the exact maxima of the
/// per-color charge and confirms the stated maximizers attain them:
/// a single neighbor peaks at (1,2), a single neighbor with a wide
/// second class peaks at (1,3), and with two neighbors the maximum lives
/// in the region with unit first classes and second classes at most 3.
pub fn verify_maximizers(s: &FlipSchedule) -> Result<MaximizerReport> {
    let certificate = validate_schedule(s);
    if !certificate.all_pass() {
        let names: Vec<String> = certificate
            .violations()
            .iter()
            .map(|c| c.label.clone())
            .collect();
        return Err(Error::Hypothesis(format!(
            "schedule certificate failed: {}",
            names.join(", ")
        )));
    }
    let cap = 8usize;
    let mut checked = 0usize;

    let mut d1_max: Option<(Rat, (usize, usize))> = None;
    let mut d1_restricted: Option<(Rat, (usize, usize))> = None;
    for a1 in 1..=cap {
        for b1 in 1..=cap {
            let z = z_value(&d1_config(a1, b1), s)?;
            checked += 1;
            if d1_max.as_ref().is_none_or(|(m, _)| z > *m) {
                d1_max = Some((z.clone(), (a1, b1)));
            }
            if b1 >= 3 && d1_restricted.as_ref().is_none_or(|(m, _)| z > *m) {
                d1_restricted = Some((z.clone(), (a1, b1)));
            }
        }
    }
    let (d1_max, d1_argmax) = d1_max.expect("one-neighbor search is nonempty");
    let (d1_restricted_max, d1_restricted_argmax) =
        d1_restricted.expect("restricted search is nonempty");
    let d1_stated = z_value(&d1_config(1, 2), s)?;
    let d1_restricted_stated = z_value(&d1_config(1, 3), s)?;

    let mut d2_max: Option<(Rat, (Vec<usize>, Vec<usize>))> = None;
    let mut d2_region: Option<Rat> = None;
    let mut d2_multi: Option<(Rat, (Vec<usize>, Vec<usize>))> = None;
    for a in shapes(2, cap) {
        for b in shapes(2, cap) {
            let m = overlaps_for(&a, &b);
            let mut any: Option<ColorConfig> = None;
            let mut multi = false;
            for (d0, d1, d2) in census_options(2) {
                if let Ok(cfg) = ColorConfig::new(3, a.clone(), b.clone(), m.clone(), d0, d1, d2) {
                    if d2 == 2 {
                        multi = true;
                    }
                    if any.is_none() {
                        any = Some(cfg);
                    }
                }
            }
            let Some(cfg) = any else { continue };
            let z = z_value(&cfg, s)?;
            checked += 1;
            if d2_max.as_ref().is_none_or(|(v, _)| z > *v) {
                d2_max = Some((z.clone(), (a.clone(), b.clone())));
            }
            if a == [1, 1] && b.iter().all(|&v| (1..=3).contains(&v))
                && d2_region.as_ref().is_none_or(|v| z > *v) {
                    d2_region = Some(z.clone());
                }
            if multi && d2_multi.as_ref().is_none_or(|(v, _)| z > *v) {
                d2_multi = Some((z.clone(), (a.clone(), b.clone())));
            }
        }
    }
    let (d2_max, d2_argmax) = d2_max.expect("two-neighbor search is nonempty");
    let d2_region_max = d2_region.expect("unit-a region is nonempty");
    let (d2_multi_max, d2_multi_argmax) = d2_multi.expect("multiblocked family is nonempty");
    let d2_multi_stated = z_value(
        &ColorConfig::new(3, vec![1, 1], vec![3, 3], vec![1, 1], 0, 0, 2)?,
        s,
    )?;

    Ok(MaximizerReport {
        d1_claim_holds: d1_stated == d1_max,
        d1_restricted_claim_holds: d1_restricted_stated == d1_restricted_max,
        d2_claim_holds: d2_region_max == d2_max,
        d2_multi_claim_holds: d2_multi_stated == d2_multi_max,
        d1_max,
        d1_argmax,
        d1_stated,
        d1_restricted_max,
        d1_restricted_argmax,
        d1_restricted_stated,
        d2_max,
        d2_argmax,
        d2_region_max,
        d2_multi_max,
        d2_multi_argmax,
        d2_multi_stated,
        configs_checked: checked,
    })
}

/// Aggregate arithmetic for one parameter instance: the branch
/// coefficients, the two rounded presentation chains, the exact worst
/// aggregate over the neighborhood census simplex, and the contraction
/// margin with its per-step quantities.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub k: Rat,
    pub delta: usize,
    pub ratio: Rat,
    pub lambda_multiblocked: Rat,
    pub lambda_singly: Rat,
    pub lambda_unblocked: Rat,
    pub lambda_overall: Rat,
    pub heavy_coefficient: Rat,
    pub heavy_literal_holds: bool,
    pub sb_chain_constant: Rat,
    pub sb_chain_value: Rat,
    pub sb_chain_target: Rat,
    pub sb_chain_holds: bool,
    pub sb_chain_min_delta_rounded: Option<usize>,
    pub sb_chain_min_delta_exact: Option<usize>,
    pub ub_chain_c1: Rat,
    pub ub_chain_c0: Rat,
    pub ub_chain_cx: Rat,
    pub ub_chain_max: Rat,
    pub ub_chain_argmax: Rat,
    pub ub_chain_holds: bool,
    pub aggregate_worst: Rat,
    pub aggregate_argmax: usize,
    pub margin: Rat,
    pub delta_scaled: Rat,
    pub mixing_constant: Rat,
    pub advisories: Vec<String>,
}

impl ContractionReport {
    pub fn contraction_holds(&self) -> bool {
        self.margin.is_positive()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "palette k = {} ({}), degree bound {}, ratio {}\n",
            render_exact(&self.k),
            render_decimal(&self.k, 10),
            self.delta,
            render_decimal(&self.ratio, 10)
        ));
        out.push_str("branch coefficients:\n");
        out.push_str(&format!(
            "  multiblocked            {}\n",
            render_decimal(&self.lambda_multiblocked, 10)
        ));
        out.push_str(&format!(
            "  singly blocked          {}\n",
            render_decimal(&self.lambda_singly, 10)
        ));
        out.push_str(&format!(
            "  unblocked (ambient)     {}\n",
            render_decimal(&self.lambda_unblocked, 10)
        ));
        out.push_str(&format!(
            "  overall (ambient)       {}\n",
            render_decimal(&self.lambda_overall, 10)
        ));
        out.push_str(&format!(
            "heavy coefficient {} <= 1.775: {}\n",
            render_decimal(&self.heavy_coefficient, 10),
            if self.heavy_literal_holds { "ok" } else { "VIOLATED" }
        ));
        let two_eta = (&self.sb_chain_value - &self.sb_chain_constant) * ri(self.delta);
        out.push_str(&format!(
            "rounded singly-blocked chain: {} + {}/{} = {} vs {}: {}",
            render_exact(&self.sb_chain_constant),
            render_exact(&two_eta),
            self.delta,
            render_decimal(&self.sb_chain_value, 10),
            render_exact(&self.sb_chain_target),
            if self.sb_chain_holds { "ok" } else { "MISSES" }
        ));
        out.push_str(&format!(
            " (closes from degree {} rounded, {} exact)\n",
            self.sb_chain_min_delta_rounded
                .map_or("never".to_string(), |d| d.to_string()),
            self.sb_chain_min_delta_exact
                .map_or("never".to_string(), |d| d.to_string())
        ));
        out.push_str(&format!(
            "rounded unblocked quadratic: max {} at x = {}: {}\n",
            render_decimal(&self.ub_chain_max, 10),
            render_decimal(&self.ub_chain_argmax, 10),
            if self.ub_chain_holds {
                "ok".to_string()
            } else {
                "misses the threshold target; the exact aggregate below decides".to_string()
            }
        ));
        out.push_str(&format!(
            "worst aggregate {} at once-or-twice count {} vs target {}\n",
            render_decimal(&self.aggregate_worst, 10),
            self.aggregate_argmax,
            render_decimal(&((rat(1, 1) - contraction_slack()) * &self.k), 10)
        ));
        out.push_str(&format!(
            "margin {} ({})\n",
            render_decimal(&self.margin, 10),
            if self.contraction_holds() {
                "positive: contraction certified"
            } else {
                "not positive: contraction NOT certified"
            }
        ));
        out.push_str(&format!(
            "per-step coefficient (times n*k) {}; mixing constant {} per n*ln(n/((1-eta)*eps))\n",
            render_decimal(&self.delta_scaled, 10),
            render_decimal(&self.mixing_constant, 10)
        ));
        for a in &self.advisories {
            out.push_str(&format!("advisory: {a}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": render_exact(&self.k),
            "delta": self.delta,
            "ratio": render_exact(&self.ratio),
            "lambda_multiblocked": render_exact(&self.lambda_multiblocked),
            "lambda_singly": render_exact(&self.lambda_singly),
            "lambda_unblocked": render_exact(&self.lambda_unblocked),
            "lambda_overall": render_exact(&self.lambda_overall),
            "heavy_coefficient": render_exact(&self.heavy_coefficient),
            "heavy_literal_holds": self.heavy_literal_holds,
            "sb_chain": {
                "constant": render_exact(&self.sb_chain_constant),
                "value": render_exact(&self.sb_chain_value),
                "target": render_exact(&self.sb_chain_target),
                "holds": self.sb_chain_holds,
                "min_delta_rounded": self.sb_chain_min_delta_rounded,
                "min_delta_exact": self.sb_chain_min_delta_exact,
            },
            "ub_chain": {
                "c1": render_exact(&self.ub_chain_c1),
                "c0": render_exact(&self.ub_chain_c0),
                "cx": render_exact(&self.ub_chain_cx),
                "max": render_exact(&self.ub_chain_max),
                "argmax": render_exact(&self.ub_chain_argmax),
                "holds": self.ub_chain_holds,
            },
            "aggregate_worst": render_exact(&self.aggregate_worst),
            "aggregate_argmax": self.aggregate_argmax,
            "margin": render_exact(&self.margin),
            "contraction_holds": self.contraction_holds(),
            "delta_scaled": render_exact(&self.delta_scaled),
            "mixing_constant": render_exact(&self.mixing_constant),
            "advisories": self.advisories,
        })
    }
}

fn ceil_to_usize(r: &Rat) -> Option<usize> {
    let c = r.ceil().to_integer();
    usize::try_from(&c).ok()
}

/// Smallest degree bound from which `constant + 2*eta/delta <= target`,
/// if any.
fn chain_min_delta(constant: &Rat, target: &Rat, two_eta: &Rat) -> Option<usize> {
    let room = target - constant;
    if !room.is_positive() {
        return if two_eta.is_zero() && !room.is_negative() {
            Some(1)
        } else {
            None
        };
    }
    if two_eta.is_zero() {
        return Some(1);
    }
    ceil_to_usize(&(two_eta / room)).map(|d| d.max(1))
}

/// Evaluates the aggregate arithmetic for one parameter instance.
/// Refuses palettes at or above the classical ratio; everything below
/// that is computed exactly, with the margin deciding whether the
/// contraction condition holds.
pub fn theorem_arithmetic(params: &AnalysisParams) -> Result<ContractionReport> {
    let s = &params.schedule;
    let delta = params.delta;
    let classical = classical_ratio() * ri(delta);
    if params.k >= classical {
        return Err(Error::Hypothesis(format!(
            "palette k = {} is at least (11/6) * degree bound = {}; that regime is covered by \
             older arguments and the aggregate chain here assumes the smaller ratio",
            render_exact(&params.k),
            render_exact(&classical)
        )));
    }
    let ratio = params.ratio();
    if ratio < ratio_threshold() {
        return Err(Error::Hypothesis(format!(
            "palette ratio k/degree bound = {} is below the threshold 1.8089 the aggregate \
             argument is anchored at",
            render_decimal(&ratio, 10)
        )));
    }
    let mut advisories = Vec::new();
    if delta < 125 {
        advisories.push(
            "degree bound is below 125; the exact aggregate margin is the deciding check"
                .to_string(),
        );
    }

    let p2 = s.probability(2);
    let eta = s.eta().clone();
    let lambda_multiblocked = reduced_multi(s);
    let lambda_singly = reduced_singly(s) - &eta * params.alpha() / ri(delta);
    let lambda_unblocked = unblocked_branch(params, params.delta1 + params.delta2);
    let lambda_overall = rmax(
        lambda_unblocked.clone(),
        rmax(lambda_singly.clone(), lambda_multiblocked.clone()),
    );
    let heavy_coefficient = rat(4, 3) + &p2 + rat(4, 3) * s.probability(4);
    let heavy_literal_holds = heavy_coefficient <= heavy_literal();
    let heavy_used = rmax(heavy_coefficient.clone(), heavy_literal());

    // Rounded chain for the singly blocked branch, anchored at the
    // threshold ratio: the branch value is at most
    // round_up(2 - P_3 + eta - eta*threshold, 5) + 2*eta/delta.
    let two_eta = rat(2, 1) * &eta;
    let sb_base = rat(2, 1) - s.probability(3) + &eta;
    let sb_constant = round_up_at(&(&sb_base - &eta * ratio_threshold()), 5);
    let sb_value = &sb_constant + &two_eta / ri(delta);
    let sb_target = round_down_at(
        &((rat(1, 1) - contraction_slack()) * ratio_threshold()),
        5,
    );
    let sb_holds = sb_value <= sb_target;
    let sb_min_rounded = chain_min_delta(&sb_constant, &sb_target, &two_eta);
    let exact_constant = &sb_base - &eta * ratio_threshold();
    let exact_target = (rat(1, 1) - contraction_slack()) * ratio_threshold();
    let sb_min_exact = chain_min_delta(&exact_constant, &exact_target, &two_eta);
    if !sb_holds {
        advisories.push(format!(
            "rounded singly-blocked chain misses at degree bound {delta}; it closes from {} \
             (rounded) and {} (exact), and the exact aggregate margin is authoritative",
            sb_min_rounded.map_or("never".to_string(), |d| d.to_string()),
            sb_min_exact.map_or("never".to_string(), |d| d.to_string())
        ));
    }

    // Rounded chain for the unblocked branch: a concave quadratic in the
    // once-or-twice fraction x, maximized at its vertex or an endpoint.
    let ub_c1 = round_up_at(&(rat(2, 1) - &p2 + &eta * (rat(1, 1) + &p2)), 4);
    let ub_c0 = round_up_at(&(&ub_c1 + &eta * classical_ratio()), 6);
    let ub_cx = &eta * &p2;
    let quad = |x: &Rat| -> Rat { &heavy_used + (&ub_c0 - &heavy_used) * x - &ub_cx * x * x };
    let (ub_argmax, ub_max) = if ub_cx.is_zero() {
        if ub_c0 >= heavy_used {
            (rat(1, 1), quad(&rat(1, 1)))
        } else {
            (rat(0, 1), quad(&rat(0, 1)))
        }
    } else {
        let vertex = (&ub_c0 - &heavy_used) / (rat(2, 1) * &ub_cx);
        let x = vertex.max(rat(0, 1)).min(rat(1, 1));
        (x.clone(), quad(&x))
    };
    let ub_holds = ub_max <= (rat(1, 1) - contraction_slack()) * ratio_threshold();
    if !ub_holds {
        advisories.push(format!(
            "rounded unblocked quadratic peaks at {}, above the threshold target {}; the exact \
             aggregate margin is authoritative",
            render_decimal(&ub_max, 10),
            render_decimal(&((rat(1, 1) - contraction_slack()) * ratio_threshold()), 10)
        ));
    }

    // Exact worst aggregate over integer once-or-twice counts t:
    // max(unblocked(t), singly, multiblocked) * t + heavy * (delta - t).
    // Concave quadratic where the unblocked branch leads, affine where a
    // constant branch leads, so the endpoints, the branch crossover, and
    // the quadratic vertex bracket the integer maximum.
    let cbranch = rmax(lambda_singly.clone(), lambda_multiblocked.clone());
    let mut candidates: BTreeSet<usize> = [0usize, delta].into_iter().collect();
    let push_candidate = |set: &mut BTreeSet<usize>, v: &Rat| {
        let clamped = v.clone().max(rat(0, 1)).min(ri(delta));
        let fl = clamped.floor().to_integer();
        for c in [fl.clone(), fl + 1u32] {
            if let Ok(u) = usize::try_from(&c) {
                if u <= delta {
                    set.insert(u);
                }
            }
        }
    };
    // unblocked(t) = a0 + a1*t with a1 = -eta*P_2/delta.
    let a1 = rat(-1, 1) * &eta * &p2 / ri(delta);
    let a0 = reduced_unblocked(s) + &eta * (&params.k + (rat(1, 1) + &p2) * ri(delta)) / ri(delta);
    if !a1.is_zero() {
        let crossover = (&cbranch - &a0) / &a1;
        push_candidate(&mut candidates, &crossover);
        // Vertex of a1*t^2 + (a0 - heavy)*t + heavy*delta.
        let vertex = (&heavy_used - &a0) / (rat(2, 1) * &a1);
        push_candidate(&mut candidates, &vertex);
    }
    let aggregate_at = |t: usize| -> Rat {
        let lam = rmax(&a0 + &a1 * ri(t), cbranch.clone());
        lam * ri(t) + &heavy_used * ri(delta - t)
    };
    let mut aggregate_worst = aggregate_at(0);
    let mut aggregate_argmax = 0usize;
    for &t in &candidates {
        let v = aggregate_at(t);
        if v > aggregate_worst {
            aggregate_worst = v;
            aggregate_argmax = t;
        }
    }
    #[cfg(debug_assertions)]
    if delta <= 512 {
        for t in 0..=delta {
            debug_assert!(
                aggregate_at(t) <= aggregate_worst,
                "candidate sweep missed the integer maximum at t = {t}"
            );
        }
    }
    let target = (rat(1, 1) - contraction_slack()) * &params.k;
    let margin = &target - &aggregate_worst;
    let (delta_scaled, mixing_constant) = if margin.is_positive() {
        (
            contraction_slack() * ri(delta),
            rat(100_000, 1) * &params.k / ri(delta),
        )
    } else {
        (Rat::zero(), Rat::zero())
    };

    Ok(ContractionReport {
        k: params.k.clone(),
        delta,
        ratio,
        lambda_multiblocked,
        lambda_singly,
        lambda_unblocked,
        lambda_overall,
        heavy_coefficient,
        heavy_literal_holds,
        sb_chain_constant: sb_constant,
        sb_chain_value: sb_value,
        sb_chain_target: sb_target,
        sb_chain_holds: sb_holds,
        sb_chain_min_delta_rounded: sb_min_rounded,
        sb_chain_min_delta_exact: sb_min_exact,
        ub_chain_c1: ub_c1,
        ub_chain_c0: ub_c0,
        ub_chain_cx: ub_cx,
        ub_chain_max: ub_max,
        ub_chain_argmax: ub_argmax,
        ub_chain_holds: ub_holds,
        aggregate_worst,
        aggregate_argmax,
        margin,
        delta_scaled,
        mixing_constant,
        advisories,
    })
}

/// Transition statistics of one neighborhood color, scaled by n*k.
#[derive(Debug, Clone)]
pub struct ColorTransitionStats {
    pub color: u32,
    pub d_c: usize,
    pub d0: usize,
    pub d1: usize,
    pub d2plus: usize,
    pub gained_scaled: Rat,
    pub gained_bound: Rat,
    pub gained_holds: bool,
    pub lost_net_scaled: Rat,
    pub lost_net_bound: Rat,
    pub lost_net_holds: bool,
    pub mc_gained: Option<(f64, f64)>,
    pub mc_lost_net: Option<(f64, f64)>,
}

/// Exact (and optionally sampled) one-step transition statistics for the
/// blocking structure around the disagreement vertex, compared against
/// the inequality bounds they must satisfy.
#[derive(Debug, Clone)]
pub struct BlockTransitionReport {
    pub per_color: Vec<ColorTransitionStats>,
    pub recolor_scaled: Rat,
    pub recolor_bound: Rat,
    pub recolor_holds: bool,
    pub mc_recolor: Option<(f64, f64)>,
    pub delta1: usize,
    pub delta2: usize,
    pub alpha: Rat,
    pub beta: Rat,
    pub trials: usize,
}

impl BlockTransitionReport {
    pub fn all_pass(&self) -> bool {
        self.recolor_holds
            && self
                .per_color
                .iter()
                .all(|c| c.gained_holds && c.lost_net_holds)
    }

    pub fn render_text(&self) -> String {
        let mark = |ok: bool| if ok { "ok" } else { "VIOLATED" };
        let mut out = String::new();
        out.push_str(&format!(
            "block transitions (alpha = {}, beta = {}, once/twice counts {}/{}, trials {})\n",
            render_exact(&self.alpha),
            render_exact(&self.beta),
            self.delta1,
            self.delta2,
            self.trials
        ));
        for c in &self.per_color {
            out.push_str(&format!(
                "color {}: census ({},{},{}); gained {} >= {}: {}; lost-net {} <= {}: {}\n",
                c.color,
                c.d0,
                c.d1,
                c.d2plus,
                render_decimal(&c.gained_scaled, 10),
                render_decimal(&c.gained_bound, 10),
                mark(c.gained_holds),
                render_decimal(&c.lost_net_scaled, 10),
                render_decimal(&c.lost_net_bound, 10),
                mark(c.lost_net_holds)
            ));
            if let Some((mean, se)) = c.mc_gained {
                out.push_str(&format!("  sampled gained {mean:.6} (se {se:.6})\n"));
            }
            if let Some((mean, se)) = c.mc_lost_net {
                out.push_str(&format!("  sampled lost-net {mean:.6} (se {se:.6})\n"));
            }
        }
        out.push_str(&format!(
            "endpoint recolor mass {} <= {}: {}\n",
            render_decimal(&self.recolor_scaled, 10),
            render_decimal(&self.recolor_bound, 10),
            mark(self.recolor_holds)
        ));
        if let Some((mean, se)) = self.mc_recolor {
            out.push_str(&format!("  sampled recolor mass {mean:.6} (se {se:.6})\n"));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "all_pass": self.all_pass(),
            "alpha": render_exact(&self.alpha),
            "beta": render_exact(&self.beta),
            "delta1": self.delta1,
            "delta2": self.delta2,
            "trials": self.trials,
            "recolor": {
                "scaled": render_exact(&self.recolor_scaled),
                "bound": render_exact(&self.recolor_bound),
                "holds": self.recolor_holds,
                "sampled": self.mc_recolor.map(|(m, s)| json!({"mean": m, "se": s})),
            },
            "per_color": self.per_color.iter().map(|c| json!({
                "color": c.color,
                "census": [c.d0, c.d1, c.d2plus],
                "gained": render_exact(&c.gained_scaled),
                "gained_bound": render_exact(&c.gained_bound),
                "gained_holds": c.gained_holds,
                "lost_net": render_exact(&c.lost_net_scaled),
                "lost_net_bound": render_exact(&c.lost_net_bound),
                "lost_net_holds": c.lost_net_holds,
                "sampled_gained": c.mc_gained.map(|(m, s)| json!({"mean": m, "se": s})),
                "sampled_lost_net": c.mc_lost_net.map(|(m, s)| json!({"mean": m, "se": s})),
            })).collect::<Vec<_>>(),
        })
    }
}

fn applied(base: &Coloring, f: &Option<Cluster>) -> Result<Coloring> {
    match f {
        Some(cl) => flip(base, cl),
        None => Ok(base.clone()),
    }
}

fn sample_index<R: Rng + ?Sized>(events: &[JointEvent], rng: &mut R) -> usize {
    let mut r: f64 = rng.random();
    for (i, e) in events.iter().enumerate() {
        let p = to_f64(&e.probability);
        if r < p {
            return i;
        }
        r -= p;
    }
    events.len() - 1
}

#[derive(Clone)]
struct MeanAcc {
    sum: f64,
    sumsq: f64,
}

impl MeanAcc {
    fn new() -> Self {
        MeanAcc { sum: 0.0, sumsq: 0.0 }
    }

    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sumsq += v * v;
    }

    fn finish(&self, n: usize) -> (f64, f64) {
        let n = n as f64;
        let mean = self.sum / n;
        let var = (self.sumsq / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Evaluates the one-step blocking transitions exactly from the full
/// coupled event list, and additionally by sampling when `trials` is
/// positive: how many same-colored neighbors become newly unblocked, how
/// many unblocked ones stop being unblocked net of the unblocked counts
/// appearing at fresh disagreements, and the chance the disagreement
/// vertex is recolored in either chain. Each statistic is compared with
/// its inequality bound.
pub fn estimate_block_transitions<R: Rng + ?Sized>(
    g: &Graph,
    pair: &NeighboringPair,
    s: &FlipSchedule,
    trials: usize,
    rng: &mut R,
) -> Result<BlockTransitionReport> {
    let events = build_coupling(g, pair, s)?;
    let vstar = pair.vstar();
    let n = g.n();
    let k = pair.x().k();
    let nk = rat(n as i64 * k as i64, 1);
    let hood = color_neighborhood(g, pair);
    let delta = g.max_degree();
    let p2 = s.probability(2);
    let alpha = rat(k as i64, 1) - ri(delta + 2);
    let d12 = hood.delta1 + hood.delta2;
    let beta = rat(k as i64, 1) - &p2 * ri(d12) + (rat(1, 1) + &p2) * ri(delta);
    let recolor_bound = rat(k as i64, 1) - &p2 * ri(d12);
    let (cx, cy) = pair.endpoint_colors();
    let before: BTreeSet<usize> = unblocked_neighbors(g, pair.x(), pair.y(), vstar)
        .into_iter()
        .collect();

    struct ColorData {
        color: u32,
        n_c: Vec<usize>,
        l: Vec<usize>,
        d0: usize,
        d1: usize,
        d2plus: usize,
    }
    let mut colors = Vec::new();
    for (c, members) in &hood.per_color {
        if members.is_empty() || *c == cx || *c == cy {
            continue;
        }
        let mut d0 = 0;
        let mut d1 = 0;
        let mut d2plus = 0;
        for &u in members {
            match crate::blocking::blocking_count(g, pair, u)? {
                0 => d0 += 1,
                1 => d1 += 1,
                _ => d2plus += 1,
            }
        }
        colors.push(ColorData {
            color: *c,
            n_c: members.clone(),
            l: l_set(g, pair, *c)?,
            d0,
            d1,
            d2plus,
        });
    }

    // Per event and color: (newly unblocked, lost, fresh unblocked sum).
    let mut cached: Vec<(Vec<(usize, usize, usize)>, bool)> = Vec::with_capacity(events.len());
    for e in &events {
        let x2 = applied(pair.x(), &e.flip_x)?;
        let y2 = applied(pair.y(), &e.flip_y)?;
        let after: BTreeSet<usize> = unblocked_neighbors(g, &x2, &y2, vstar)
            .into_iter()
            .collect();
        let recolored = e.flip_x.as_ref().is_some_and(|cl| cl.contains(vstar))
            || e.flip_y.as_ref().is_some_and(|cl| cl.contains(vstar));
        let per_color = colors
            .iter()
            .map(|cd| {
                let gained = cd
                    .n_c
                    .iter()
                    .filter(|u| after.contains(u) && !before.contains(u))
                    .count();
                let lost = cd
                    .n_c
                    .iter()
                    .filter(|u| before.contains(u) && !after.contains(u))
                    .count();
                let fresh: usize = cd
                    .l
                    .iter()
                    .map(|&u| unblocked_count_general(g, &x2, &y2, u))
                    .sum();
                (gained, lost, fresh)
            })
            .collect();
        cached.push((per_color, recolored));
    }

    let mut gained_exact = vec![Rat::zero(); colors.len()];
    let mut lost_net_exact = vec![Rat::zero(); colors.len()];
    let mut recolor_exact = Rat::zero();
    for (e, (per_color, recolored)) in events.iter().zip(&cached) {
        for (i, &(gained, lost, fresh)) in per_color.iter().enumerate() {
            gained_exact[i] += ri(gained) * &e.probability;
            lost_net_exact[i] += (ri(lost) - ri(fresh)) * &e.probability;
        }
        if *recolored {
            recolor_exact += &e.probability;
        }
    }

    let mut mc_gained = vec![MeanAcc::new(); colors.len()];
    let mut mc_lost_net = vec![MeanAcc::new(); colors.len()];
    let mut mc_recolor = MeanAcc::new();
    if trials > 0 {
        let nk_f = to_f64(&nk);
        for _ in 0..trials {
            let idx = sample_index(&events, rng);
            let (per_color, recolored) = &cached[idx];
            for (i, &(gained, lost, fresh)) in per_color.iter().enumerate() {
                mc_gained[i].push(gained as f64 * nk_f);
                mc_lost_net[i].push((lost as f64 - fresh as f64) * nk_f);
            }
            mc_recolor.push(if *recolored { nk_f } else { 0.0 });
        }
    }

    let per_color = colors
        .iter()
        .enumerate()
        .map(|(i, cd)| {
            let gained_scaled = &gained_exact[i] * &nk;
            let lost_net_scaled = &lost_net_exact[i] * &nk;
            let gained_bound = ri(cd.d1) * &alpha;
            let lost_net_bound = ri(cd.d0) * &beta;
            ColorTransitionStats {
                color: cd.color,
                d_c: cd.n_c.len(),
                d0: cd.d0,
                d1: cd.d1,
                d2plus: cd.d2plus,
                gained_holds: gained_scaled >= gained_bound,
                lost_net_holds: lost_net_scaled <= lost_net_bound,
                gained_scaled,
                gained_bound,
                lost_net_scaled,
                lost_net_bound,
                mc_gained: (trials > 0).then(|| mc_gained[i].finish(trials)),
                mc_lost_net: (trials > 0).then(|| mc_lost_net[i].finish(trials)),
            }
        })
        .collect();

    let recolor_scaled = &recolor_exact * &nk;
    Ok(BlockTransitionReport {
        per_color,
        recolor_holds: recolor_scaled <= recolor_bound,
        recolor_scaled,
        recolor_bound,
        mc_recolor: (trials > 0).then(|| mc_recolor.finish(trials)),
        delta1: hood.delta1,
        delta2: hood.delta2,
        alpha,
        beta,
        trials,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Flavor {
    Unblocked,
    Singly,
    Multi,
}

/// Builds the smallest tree whose disagreement neighborhood reproduces
/// `cfg`: the endpoint wears colors 1 and 2, each same-colored neighbor
/// carries one alternating chain per class, and a two-leaf fork realizes
/// a multiblocked census where a plain chain would leave the neighbor
/// singly blocked. Swallowed entries need a cycle through the shared
/// neighborhood, which no tree has.
pub fn realize_on_tree(cfg: &ColorConfig) -> Result<(Graph, NeighboringPair)> {
    if cfg.color < 3 {
        return Err(Error::Domain(
            "the worn color must differ from the endpoint colors 1 and 2".into(),
        ));
    }
    if cfg.a.iter().chain(&cfg.b).any(|&v| v == 0) {
        return Err(Error::Domain(
            "swallowed entries need a cycle through the shared neighborhood; trees have none"
                .into(),
        ));
    }
    if cfg.m.iter().any(|&v| v != 1) {
        return Err(Error::Domain(
            "tree classes meet only at the neighbor itself, so every overlap is 1".into(),
        ));
    }

    // Assign a census flavor to each neighbor: unit pairs are unblocked,
    // one side of size 2 forces singly blocked, both sides at least 2
    // force multiblocked, and a unit side with a wide mate goes either
    // way.
    let mut flavors: Vec<Option<Flavor>> = vec![None; cfg.d_c];
    let mut need_u = cfg.d0;
    let mut need_s = cfg.d1;
    let mut need_m = cfg.d2plus;
    let mut flexible = Vec::new();
    for i in 0..cfg.d_c {
        match (cfg.a[i], cfg.b[i]) {
            (1, 1) => {
                if need_u == 0 {
                    return Err(Error::Domain("census undercounts unblocked neighbors".into()));
                }
                need_u -= 1;
                flavors[i] = Some(Flavor::Unblocked);
            }
            (1, 2) | (2, 1) => {
                if need_s == 0 {
                    return Err(Error::Domain("census undercounts singly blocked neighbors".into()));
                }
                need_s -= 1;
                flavors[i] = Some(Flavor::Singly);
            }
            (1, _) | (_, 1) => flexible.push(i),
            _ => {
                if need_m == 0 {
                    return Err(Error::Domain("census undercounts multiblocked neighbors".into()));
                }
                need_m -= 1;
                flavors[i] = Some(Flavor::Multi);
            }
        }
    }
    if need_u != 0 || need_s + need_m != flexible.len() {
        return Err(Error::Domain(
            "census does not match what the class sizes admit".into(),
        ));
    }
    for &i in &flexible {
        if need_s > 0 {
            need_s -= 1;
            flavors[i] = Some(Flavor::Singly);
        } else {
            flavors[i] = Some(Flavor::Multi);
        }
    }

    let c = cfg.color;
    let k = c + 1;
    let mut colors: Vec<u32> = vec![1];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let push_vertex = |colors: &mut Vec<u32>, edges: &mut Vec<(usize, usize)>, parent: usize, color: u32| -> usize {
        let id = colors.len();
        colors.push(color);
        edges.push((parent, id));
        id
    };
    // One chain of `len` additional vertices alternating between `first`
    // and `second`, attached below `from`.
    let chain = |colors: &mut Vec<u32>,
                 edges: &mut Vec<(usize, usize)>,
                 from: usize,
                 len: usize,
                 first: u32,
                 second: u32| {
        let mut prev = from;
        for step in 0..len {
            let color = if step % 2 == 0 { first } else { second };
            let id = colors.len();
            colors.push(color);
            edges.push((prev, id));
            prev = id;
        }
    };
    for i in 0..cfg.d_c {
        let u = push_vertex(&mut colors, &mut edges, 0, c);
        let flavor = flavors[i].expect("every neighbor is labeled");
        // Class sizes: a_i alternates with color 2, b_i with color 1.
        let fork_a = flavor == Flavor::Multi && cfg.b[i] < 2;
        let fork_b = flavor == Flavor::Multi && cfg.a[i] < 2 && !fork_a;
        if fork_a {
            let w1 = push_vertex(&mut colors, &mut edges, u, 2);
            push_vertex(&mut colors, &mut edges, u, 2);
            chain(&mut colors, &mut edges, w1, cfg.a[i] - 3, c, 2);
        } else {
            chain(&mut colors, &mut edges, u, cfg.a[i] - 1, 2, c);
        }
        if fork_b {
            let z1 = push_vertex(&mut colors, &mut edges, u, 1);
            push_vertex(&mut colors, &mut edges, u, 1);
            chain(&mut colors, &mut edges, z1, cfg.b[i] - 3, c, 1);
        } else {
            chain(&mut colors, &mut edges, u, cfg.b[i] - 1, 1, c);
        }
    }
    let n = colors.len();
    let g = Graph::new(n, edges)?;
    let x = Coloring::new(colors, k)?;
    let pair = NeighboringPair::from_base(x, 0, 2)?;
    #[cfg(debug_assertions)]
    {
        let rebuilt = color_config(&g, &pair, c)?;
        debug_assert_eq!(&rebuilt, cfg, "tree instance must reproduce the configuration");
    }
    Ok((g, pair))
}

/// Convenience wrapper for the cross-check that `z_value` matches the
/// coupled step exactly on a tree realization: returns the pair
/// (n*k times the restricted expected change, z_value).
pub fn tree_charge_comparison(
    cfg: &ColorConfig,
    s: &FlipSchedule,
) -> Result<(Rat, Rat)> {
    let (g, pair) = realize_on_tree(cfg)?;
    let subset = l_set(&g, &pair, cfg.color)?;
    let restricted = expected_hamming_change_restricted(&g, &pair, s, &subset)?;
    let nk = rat(g.n() as i64 * pair.x().k() as i64, 1);
    Ok((restricted * nk, z_value(cfg, s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s11() -> FlipSchedule {
        FlipSchedule::setting_1_1()
    }

    fn params_at(ratio_str: &str, delta: usize) -> AnalysisParams {
        AnalysisParams::from_ratio(&parse_rational(ratio_str).unwrap(), delta, s11()).unwrap()
    }

    fn cfg1(a: usize, b: usize) -> ColorConfig {
        d1_config(a, b)
    }

    fn cfg2(a: [usize; 2], b: [usize; 2]) -> ColorConfig {
        let m = overlaps_for(&a, &b);
        for (d0, d1, d2) in census_options(2) {
            if let Ok(cfg) = ColorConfig::new(3, a.to_vec(), b.to_vec(), m.clone(), d0, d1, d2) {
                return cfg;
            }
        }
        panic!("no census fits {a:?} {b:?}");
    }

    fn q(s: &str) -> Rat {
        parse_rational(s).unwrap()
    }

    #[test]
    fn ratio_params_expose_exact_weights() {
        let p = params_at("1.8089", 125);
        assert_eq!(p.k, rat(18089, 80));
        assert_eq!(p.ratio(), rat(18089, 10000));
        assert_eq!(p.alpha(), rat(7929, 80));
        assert_eq!(p.beta_at(0), rat(31329, 80));
        assert_eq!(p.beta(), p.beta_at(0));
        assert!(p.beta_at(125) < p.beta_at(0));
    }

    #[test]
    fn params_reject_bad_inputs() {
        assert!(AnalysisParams::new(rat(5, 1), 0, 0, 0, s11()).is_err());
        assert!(AnalysisParams::new(rat(-1, 1), 5, 0, 0, s11()).is_err());
        assert!(AnalysisParams::new(rat(5, 1), 5, 3, 3, s11()).is_err());
    }

    #[test]
    fn charge_matches_hand_table() {
        let s = s11();
        let z = |cfg: &ColorConfig| z_value(cfg, &s).unwrap();
        assert_eq!(z(&cfg1(1, 1)), q("0.676"));
        assert_eq!(z(&cfg1(1, 2)), q("0.846"));
        assert_eq!(z(&cfg1(1, 3)), q("0.808"));
        assert_eq!(z(&cfg1(1, 4)), q("0.808"));
        assert_eq!(z(&cfg1(1, 5)), q("0.808"));
        assert_eq!(z(&cfg1(2, 2)), q("0.51"));
        assert_eq!(z(&cfg2([1, 1], [1, 1])), q("2.154"));
        assert_eq!(z(&cfg2([1, 1], [2, 2])), q("2.692"));
        assert_eq!(z(&cfg2([1, 1], [3, 3])), q("2.616"));
        assert_eq!(z(&cfg2([1, 1], [1, 2])), q("2.324"));
        assert_eq!(z(&cfg2([1, 1], [1, 3])), q("2.264"));
        assert_eq!(z(&cfg2([3, 0], [1, 1])), q("2.132"));
    }

    #[test]
    fn charge_rejects_tampered_totals() {
        let mut cfg = cfg1(1, 2);
        cfg.big_a += 1;
        assert!(matches!(z_value(&cfg, &s11()), Err(Error::Config(_))));
    }

    #[test]
    fn discounted_charge_reduces_without_eta() {
        let glauber = FlipSchedule::glauber();
        let params = AnalysisParams::new(rat(11, 1), 5, 0, 0, glauber.clone()).unwrap();
        for cfg in [cfg1(1, 1), cfg1(1, 2), cfg2([1, 1], [2, 2])] {
            assert_eq!(
                z_tilde_value(&cfg, &params).unwrap(),
                z_value(&cfg, &glauber).unwrap()
            );
        }
    }

    #[test]
    fn discounted_charge_applies_exact_credits() {
        let params = params_at("1.8089", 125);
        let unblocked = z_tilde_value(&cfg1(1, 1), &params).unwrap();
        assert_eq!(unblocked, q("0.82293301"));
        let singly = z_tilde_value(&cfg1(1, 2), &params).unwrap();
        assert_eq!(singly, q("0.80881299"));
    }

    #[test]
    fn case_checks_pass_for_main_preset() {
        let report = verify_case_lemmas(&params_at("1.8089", 125)).unwrap();
        assert!(report.all_pass(), "\n{}", report.render_text());
        assert!(report.violations.is_empty());
        assert!(report.configs_checked > 1000);
        assert_eq!(report.heavy_coefficient, rat(1331, 750));
        assert!(report.heavy_literal_holds);
        let fam = |label: &str| {
            report
                .families
                .iter()
                .find(|f| f.label == label)
                .unwrap_or_else(|| panic!("family {label} missing"))
        };
        let unblocked = fam("unblocked");
        assert!(unblocked.tight());
        assert_eq!(unblocked.worst_a, vec![1]);
        assert_eq!(unblocked.worst_b, vec![1]);
        let singly = fam("singly blocked");
        assert!(singly.tight());
        assert_eq!(singly.worst_a, vec![1]);
        assert_eq!(singly.worst_b, vec![2]);
        let multi = fam("multiblocked");
        assert!(multi.tight());
        assert_eq!(multi.worst_a, vec![1]);
        assert_eq!(multi.worst_b, vec![3]);
        let mixed = fam("mixed census");
        assert!(!mixed.tight());
        assert!(mixed.configs > 0);
    }

    #[test]
    fn case_checks_hold_in_single_flip_regime() {
        let params = AnalysisParams::new(rat(11, 1), 5, 0, 0, FlipSchedule::glauber()).unwrap();
        let report = verify_case_lemmas(&params).unwrap();
        assert!(report.all_pass(), "\n{}", report.render_text());
        for label in ["unblocked", "singly blocked", "multiblocked"] {
            let fam = report.families.iter().find(|f| f.label == label).unwrap();
            assert_eq!(fam.lambda, rat(2, 1), "{label} coefficient");
        }
    }

    #[test]
    fn case_checks_refuse_broken_schedules() {
        let p: Vec<Rat> = ["1", "0.324", "0.30", "0.088", "0.044", "0.011"]
            .iter()
            .map(|v| q(v))
            .collect();
        let bad = FlipSchedule::new(p, q("0.0469")).unwrap();
        let err = verify_case_lemmas(
            &AnalysisParams::from_ratio(&q("1.8089"), 125, bad).unwrap(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("FP1"), "{err}");

        let alt = FlipSchedule::setting_1_1_alt();
        let err = verify_case_lemmas(
            &AnalysisParams::from_ratio(&q("1.8089"), 125, alt).unwrap(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("FP3(j=4)"), "{err}");
    }

    #[test]
    fn case_checks_refuse_small_palettes() {
        let err = verify_case_lemmas(
            &AnalysisParams::new(rat(6, 1), 5, 0, 0, s11()).unwrap(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("free-color"), "{err}");
    }

    #[test]
    fn maximizer_search_matches_stated_points() {
        let report = verify_maximizers(&s11()).unwrap();
        assert!(report.all_pass(), "\n{}", report.render_text());
        assert_eq!(report.d1_max, q("0.846"));
        assert_eq!(report.d1_argmax, (1, 2));
        assert_eq!(report.d1_restricted_max, q("0.808"));
        assert_eq!(report.d1_restricted_argmax, (1, 3));
        assert_eq!(report.d2_max, q("2.692"));
        assert_eq!(report.d2_argmax, (vec![1, 1], vec![2, 2]));
        assert_eq!(report.d2_region_max, q("2.692"));
        assert_eq!(report.d2_multi_max, q("2.616"));
        assert_eq!(report.d2_multi_argmax, (vec![1, 1], vec![3, 3]));
    }

    #[test]
    fn arithmetic_reproduces_rounded_chains() {
        let rep = theorem_arithmetic(&params_at("1.8089", 125)).unwrap();
        assert_eq!(rep.lambda_multiblocked, q("1.808"));
        assert_eq!(render_decimal(&rep.lambda_multiblocked, 10), "1.808");
        assert_eq!(rep.lambda_singly, q("1.80881299"));
        assert_eq!(rep.sb_chain_constant, q("1.80807"));
        assert_eq!(rep.sb_chain_target, q("1.80888"));
        assert!(rep.sb_chain_holds);
        assert_eq!(rep.sb_chain_min_delta_rounded, Some(116));
        assert_eq!(rep.sb_chain_min_delta_exact, Some(115));
        assert_eq!(rep.ub_chain_c1, q("1.7381"));
        assert_eq!(rep.ub_chain_c0, q("1.824084"));
        assert_eq!(rep.ub_chain_cx, q("0.0151956"));
        assert_eq!(rep.ub_chain_max, q("1.8088884"));
        assert_eq!(render_decimal(&rep.ub_chain_max, 10), "1.8088884");
        assert_eq!(rep.ub_chain_argmax, rat(1, 1));
        assert!(!rep.ub_chain_holds);

        let rep114 = theorem_arithmetic(&params_at("1.8089", 114)).unwrap();
        assert!(!rep114.sb_chain_holds);
        assert_eq!(
            rep114.sb_chain_value,
            q("1.80807") + q("0.0938") / rat(114, 1)
        );
    }

    #[test]
    fn arithmetic_certifies_margin_at_the_threshold() {
        let rep = theorem_arithmetic(&params_at("1.8089", 125)).unwrap();
        assert_eq!(rep.margin, q("0.008615125"));
        assert!(rep.contraction_holds());
        assert_eq!(rep.aggregate_argmax, 125);
        assert_eq!(rep.delta_scaled, q("0.00125"));
        assert_eq!(rep.mixing_constant, rat(180890, 1));

        // At degree bound 114 the exact aggregate misses as well, so the
        // per-step coefficient must be withheld.
        let rep114 = theorem_arithmetic(&params_at("1.8089", 114)).unwrap();
        assert!(rep114.margin.is_negative());
        assert!(!rep114.contraction_holds());
        assert!(rep114.delta_scaled.is_zero());
        assert!(rep114.mixing_constant.is_zero());
        let rep115 = theorem_arithmetic(&params_at("1.8089", 115)).unwrap();
        assert!(rep115.margin.is_positive(), "{}", rep115.render_text());
    }

    #[test]
    fn arithmetic_refuses_ratios_outside_the_regime() {
        let params = AnalysisParams::new(rat(11, 6) * rat(125, 1), 125, 0, 0, s11()).unwrap();
        assert!(matches!(
            theorem_arithmetic(&params),
            Err(Error::Hypothesis(_))
        ));
        let above = AnalysisParams::from_ratio(&rat(19, 10), 125, s11()).unwrap();
        assert!(theorem_arithmetic(&above).is_err());
        let below = theorem_arithmetic(&params_at("1.79", 125)).unwrap_err();
        assert!(below.to_string().contains("1.8089"), "{below}");
    }

    #[test]
    fn tree_realizations_reproduce_their_configuration() {
        let s = s11();
        let singly_wide = ColorConfig::new(3, vec![1], vec![3], vec![1], 0, 1, 0).unwrap();
        let multi_wide = ColorConfig::new(3, vec![1], vec![3], vec![1], 0, 0, 1).unwrap();
        let cases = vec![
            cfg1(1, 1),
            cfg1(1, 2),
            cfg1(4, 3),
            singly_wide,
            multi_wide,
            cfg2([1, 1], [2, 2]),
            cfg2([2, 1], [3, 3]),
            ColorConfig::new(3, vec![1, 1], vec![3, 3], vec![1, 1], 0, 0, 2).unwrap(),
            ColorConfig::new(3, vec![1, 1], vec![3, 3], vec![1, 1], 0, 1, 1).unwrap(),
        ];
        for cfg in cases {
            let (g, pair) = realize_on_tree(&cfg).unwrap();
            let rebuilt = color_config(&g, &pair, cfg.color).unwrap();
            assert_eq!(rebuilt, cfg);
            let (charge, z) = tree_charge_comparison(&cfg, &s).unwrap();
            assert_eq!(charge, z, "restricted change mismatch for {cfg:?}");
        }
    }

    #[test]
    fn tree_realization_rejects_impossible_shapes() {
        let zeroed = cfg2([3, 0], [1, 1]);
        assert!(matches!(realize_on_tree(&zeroed), Err(Error::Domain(_))));
        let mut wide = cfg2([2, 2], [2, 2]);
        wide.m = vec![2, 1];
        assert!(matches!(realize_on_tree(&wide), Err(Error::Domain(_))));
    }

    #[test]
    fn block_transitions_hold_on_a_small_tree() {
        let g = Graph::new(5, [(0, 1), (0, 2), (1, 3), (2, 4)]).unwrap();
        let x = Coloring::new(vec![1, 3, 3, 2, 1], 5).unwrap();
        let pair = NeighboringPair::from_base(x, 0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let report = estimate_block_transitions(&g, &pair, &s11(), 0, &mut rng).unwrap();
        assert!(report.all_pass(), "\n{}", report.render_text());
        assert_eq!(report.per_color.len(), 1);
        assert_eq!(report.per_color[0].color, 3);
        assert_eq!(report.per_color[0].d1, 2);
        assert!(report.mc_recolor.is_none());

        let sampled = estimate_block_transitions(&g, &pair, &s11(), 20_000, &mut rng).unwrap();
        let stats = &sampled.per_color[0];
        let (mean, se) = stats.mc_gained.unwrap();
        let exact = to_f64(&stats.gained_scaled);
        assert!(
            (mean - exact).abs() <= 4.0 * se + 1e-9,
            "sampled gained {mean} strays from exact {exact} (se {se})"
        );
        let (mean, se) = sampled.mc_recolor.unwrap();
        let exact = to_f64(&sampled.recolor_scaled);
        assert!((mean - exact).abs() <= 4.0 * se + 1e-9);
    }

    #[test]
    fn block_transitions_hold_with_unblocked_neighbors() {
        let g = Graph::new(3, [(0, 1), (0, 2)]).unwrap();
        let x = Coloring::new(vec![1, 3, 3], 5).unwrap();
        let pair = NeighboringPair::from_base(x, 0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let report = estimate_block_transitions(&g, &pair, &s11(), 0, &mut rng).unwrap();
        assert!(report.all_pass(), "\n{}", report.render_text());
        let stats = &report.per_color[0];
        assert_eq!(stats.d0, 2);
        // No singly blocked neighbors, so the gain bound degenerates.
        assert!(stats.gained_bound.is_zero());
    }

    #[test]
    fn reports_serialize_headline_numbers() {
        let case = verify_case_lemmas(&params_at("1.8089", 125)).unwrap();
        let v = case.to_json();
        assert_eq!(v["violations"].as_array().unwrap().len(), 0);
        assert_eq!(v["heavy_coefficient"], "1331/750");
        let contraction = theorem_arithmetic(&params_at("1.8089", 125)).unwrap();
        let v = contraction.to_json();
        assert_eq!(v["margin"], "0.008615125");
        assert_eq!(v["contraction_holds"], true);
        let max = verify_maximizers(&s11()).unwrap();
        assert_eq!(max.to_json()["d1"]["max"], "0.846");
        assert!(!theorem_arithmetic(&params_at("1.8089", 125))
            .unwrap()
            .render_text()
            .is_empty());
    }
}
