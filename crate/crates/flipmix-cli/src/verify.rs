//! `flipmix verify`: run the whole verification stack and exit 0 iff every
//! check passes.
//!
//! Sections: the schedule certificate, the case-lemma enumeration, the
//! maximizer checks, and the contraction arithmetic. A refusal (parameters
//! outside the supported region) counts as that section failing, with the
//! reason in the report. When the requested schedule is one of the two
//! built-in presets differing only in their third flip probability, the
//! report also shows the other preset's certificate outcome and
//! multiblocked-branch coefficient side by side; that block is
//! informational and never affects the exit code.

use crate::output::DECIMAL_SIG;
use crate::VerifyArgs;
use anyhow::Result;
use flipmix_core::{
    parse_rational, render_decimal, render_exact, theorem_arithmetic, validate_schedule,
    verify_case_lemmas, verify_maximizers, AnalysisParams, CaseLemmaReport, ContractionReport,
    FlipSchedule, MaximizerReport, PropertyStatus, Rat, ValidationReport,
};
use serde_json::{json, Value};

pub fn run(args: &VerifyArgs) -> Result<i32> {
    let schedule = crate::resolve_schedule(&args.schedule)?;
    let ratio = parse_rational(&args.k_ratio)?;
    let params = AnalysisParams::from_ratio(&ratio, args.delta, schedule.clone())?;

    let certificate = validate_schedule(&schedule);
    let cases = verify_case_lemmas(&params);
    let maximizers = verify_maximizers(&schedule);
    let contraction = theorem_arithmetic(&params);

    let mut failing: Vec<String> = Vec::new();
    if !certificate.all_pass() {
        failing.push("schedule-certificate".to_string());
    }
    match &cases {
        Ok(r) if r.all_pass() => {}
        Ok(_) => failing.push("case-lemmas".to_string()),
        Err(e) => failing.push(format!("case-lemmas (refused: {e})")),
    }
    match &maximizers {
        Ok(r) if r.all_pass() => {}
        Ok(_) => failing.push("maximizer-checks".to_string()),
        Err(e) => failing.push(format!("maximizer-checks (refused: {e})")),
    }
    match &contraction {
        Ok(r) if r.contraction_holds() => {}
        Ok(_) => failing.push("contraction-arithmetic".to_string()),
        Err(e) => failing.push(format!("contraction-arithmetic (refused: {e})")),
    }

    let variant = variant_comparison(&args.schedule, &ratio, args.delta);

    if args.json {
        let report = json!({
            "schedule": args.schedule,
            "k_ratio": rat_json(&ratio),
            "delta": args.delta,
            "certificate": certificate_json(&certificate),
            "case_lemmas": section_json(&cases, case_lemmas_json),
            "maximizers": section_json(&maximizers, maximizers_json),
            "contraction": section_json(&contraction, contraction_json),
            "alternate_preset": variant.as_ref().map(variant_json),
            "precision": DECIMAL_SIG,
            "pass": failing.is_empty(),
            "failing": failing,
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("schedule {} at k/Delta = {} (= {}), Delta = {}", args.schedule, args.k_ratio, render_exact(&ratio), args.delta);
        println!();
        println!("== schedule certificate ==");
        print!("{}", certificate.render_text());
        println!();
        println!("== case lemmas ==");
        match &cases {
            Ok(r) => print!("{}", r.render_text()),
            Err(e) => println!("refused: {e}"),
        }
        println!();
        println!("== maximizer checks ==");
        match &maximizers {
            Ok(r) => print!("{}", r.render_text()),
            Err(e) => println!("refused: {e}"),
        }
        println!();
        println!("== contraction arithmetic ==");
        match &contraction {
            Ok(r) => print!("{}", r.render_text()),
            Err(e) => println!("refused: {e}"),
        }
        if let Some(v) = &variant {
            println!();
            println!(
                "== preset comparison (third flip probability {} vs {}) ==",
                v.requested_p3, v.alternate_p3
            );
            println!("{}", v.render_requested());
            println!("{}", v.render_alternate());
            println!("informational only; the exit code reflects the requested schedule");
        }
        println!();
        if failing.is_empty() {
            println!("RESULT: PASS");
        } else {
            println!("RESULT: FAIL ({})", failing.join("; "));
        }
    }

    Ok(if failing.is_empty() { 0 } else { 1 })
}

/// Side-by-side data for the two presets that differ only in P_3.
struct VariantComparison {
    requested_name: String,
    alternate_name: String,
    requested_p3: String,
    alternate_p3: String,
    requested_cert_pass: bool,
    alternate_cert_pass: bool,
    alternate_violations: Vec<String>,
    requested_lambda: Option<Rat>,
    alternate_lambda: Option<Rat>,
    requested_refusal: Option<String>,
    alternate_refusal: Option<String>,
}

impl VariantComparison {
    fn render_requested(&self) -> String {
        render_line(
            "requested",
            &self.requested_name,
            self.requested_cert_pass,
            &[],
            &self.requested_lambda,
            &self.requested_refusal,
        )
    }

    fn render_alternate(&self) -> String {
        render_line(
            "alternate",
            &self.alternate_name,
            self.alternate_cert_pass,
            &self.alternate_violations,
            &self.alternate_lambda,
            &self.alternate_refusal,
        )
    }
}

fn render_line(
    role: &str,
    name: &str,
    cert_pass: bool,
    violations: &[String],
    lambda: &Option<Rat>,
    refusal: &Option<String>,
) -> String {
    let cert = if cert_pass {
        "certificate PASS".to_string()
    } else if violations.is_empty() {
        "certificate FAIL".to_string()
    } else {
        format!("certificate FAIL ({})", violations.join(", "))
    };
    let coeff = match (lambda, refusal) {
        (Some(l), _) => format!(
            "multiblocked coefficient {} (= {})",
            render_decimal(l, DECIMAL_SIG),
            render_exact(l)
        ),
        (None, Some(msg)) => format!("arithmetic refused: {msg}"),
        (None, None) => "arithmetic unavailable".to_string(),
    };
    format!("{role:9} {name:16} {cert}; {coeff}")
}

fn variant_comparison(schedule_arg: &str, ratio: &Rat, delta: usize) -> Option<VariantComparison> {
    let alternate_name = match schedule_arg {
        "setting-1.1" => "setting-1.1-alt",
        "setting-1.1-alt" => "setting-1.1",
        _ => return None,
    };
    let requested = FlipSchedule::preset(schedule_arg)?;
    let alternate = FlipSchedule::preset(alternate_name)?;
    let p3 = |s: &FlipSchedule| render_exact(&s.probability(3));

    let lambda_of = |s: &FlipSchedule| -> (Option<Rat>, Option<String>) {
        match AnalysisParams::from_ratio(ratio, delta, s.clone())
            .and_then(|p| theorem_arithmetic(&p))
        {
            Ok(r) => (Some(r.lambda_multiblocked), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let (requested_lambda, requested_refusal) = lambda_of(&requested);
    let (alternate_lambda, alternate_refusal) = lambda_of(&alternate);

    let requested_cert = validate_schedule(&requested);
    let alternate_cert = validate_schedule(&alternate);

    Some(VariantComparison {
        requested_name: schedule_arg.to_string(),
        alternate_name: alternate_name.to_string(),
        requested_p3: p3(&requested),
        alternate_p3: p3(&alternate),
        requested_cert_pass: requested_cert.all_pass(),
        alternate_cert_pass: alternate_cert.all_pass(),
        alternate_violations: alternate_cert
            .violations()
            .iter()
            .map(|c| c.label.clone())
            .collect(),
        requested_lambda,
        alternate_lambda,
        requested_refusal,
        alternate_refusal,
    })
}

fn rat_json(r: &Rat) -> Value {
    json!({
        "decimal": render_decimal(r, DECIMAL_SIG),
        "exact": render_exact(r),
    })
}

fn status_str(s: PropertyStatus) -> &'static str {
    match s {
        PropertyStatus::HoldsStrict => "holds-strict",
        PropertyStatus::HoldsWithEquality => "holds-with-equality",
        PropertyStatus::Violated => "violated",
    }
}

fn certificate_json(report: &ValidationReport) -> Value {
    json!({
        "all_pass": report.all_pass(),
        "checks": report.checks.iter().map(|c| json!({
            "label": c.label,
            "status": status_str(c.status),
            "statement": c.statement,
        })).collect::<Vec<_>>(),
    })
}

fn section_json<T>(outcome: &flipmix_core::Result<T>, render: fn(&T) -> Value) -> Value {
    match outcome {
        Ok(r) => render(r),
        Err(e) => json!({"all_pass": false, "refused": e.to_string()}),
    }
}

fn case_lemmas_json(report: &CaseLemmaReport) -> Value {
    json!({
        "all_pass": report.all_pass(),
        "configs_checked": report.configs_checked,
        "violations": report.violations.len(),
        "heavy_coefficient": rat_json(&report.heavy_coefficient),
        "heavy_literal_holds": report.heavy_literal_holds,
        "families": report.families.iter().map(|f| json!({
            "label": f.label,
            "lambda": rat_json(&f.lambda),
            "configs": f.configs,
            "worst_slack": rat_json(&f.worst_slack),
        })).collect::<Vec<_>>(),
    })
}

fn maximizers_json(report: &MaximizerReport) -> Value {
    json!({
        "all_pass": report.all_pass(),
        "d1": {
            "max": rat_json(&report.d1_max),
            "argmax": [report.d1_argmax.0, report.d1_argmax.1],
            "stated": rat_json(&report.d1_stated),
            "claim_holds": report.d1_claim_holds,
        },
        "d1_restricted": {
            "max": rat_json(&report.d1_restricted_max),
            "argmax": [report.d1_restricted_argmax.0, report.d1_restricted_argmax.1],
            "stated": rat_json(&report.d1_restricted_stated),
            "claim_holds": report.d1_restricted_claim_holds,
        },
        "d2": {
            "max": rat_json(&report.d2_max),
            "argmax": {"a": report.d2_argmax.0, "b": report.d2_argmax.1},
            "region_max": rat_json(&report.d2_region_max),
            "claim_holds": report.d2_claim_holds,
        },
        "d2_multi": {
            "max": rat_json(&report.d2_multi_max),
            "argmax": {"a": report.d2_multi_argmax.0, "b": report.d2_multi_argmax.1},
            "stated": rat_json(&report.d2_multi_stated),
            "claim_holds": report.d2_multi_claim_holds,
        },
    })
}

fn contraction_json(report: &ContractionReport) -> Value {
    json!({
        "all_pass": report.contraction_holds(),
        "k": rat_json(&report.k),
        "delta": report.delta,
        "ratio": rat_json(&report.ratio),
        "lambda_multiblocked": rat_json(&report.lambda_multiblocked),
        "lambda_singly": rat_json(&report.lambda_singly),
        "lambda_unblocked": rat_json(&report.lambda_unblocked),
        "lambda_overall": rat_json(&report.lambda_overall),
        "heavy_coefficient": rat_json(&report.heavy_coefficient),
        "heavy_literal_holds": report.heavy_literal_holds,
        "sb_chain": {
            "constant": rat_json(&report.sb_chain_constant),
            "value": rat_json(&report.sb_chain_value),
            "target": rat_json(&report.sb_chain_target),
            "holds": report.sb_chain_holds,
            "min_delta_rounded": report.sb_chain_min_delta_rounded,
            "min_delta_exact": report.sb_chain_min_delta_exact,
        },
        "ub_chain": {
            "c1": rat_json(&report.ub_chain_c1),
            "c0": rat_json(&report.ub_chain_c0),
            "cx": rat_json(&report.ub_chain_cx),
            "max": rat_json(&report.ub_chain_max),
            "argmax": rat_json(&report.ub_chain_argmax),
            "holds": report.ub_chain_holds,
        },
        "aggregate_worst": rat_json(&report.aggregate_worst),
        "aggregate_argmax": report.aggregate_argmax,
        "margin": rat_json(&report.margin),
        "delta_scaled": rat_json(&report.delta_scaled),
        "mixing_constant": rat_json(&report.mixing_constant),
        "advisories": report.advisories,
    })
}

fn variant_json(v: &VariantComparison) -> Value {
    let lambda = |l: &Option<Rat>| l.as_ref().map(rat_json);
    json!({
        "requested": {
            "name": v.requested_name,
            "p3": v.requested_p3,
            "certificate_pass": v.requested_cert_pass,
            "lambda_multiblocked": lambda(&v.requested_lambda),
            "refused": v.requested_refusal,
        },
        "alternate": {
            "name": v.alternate_name,
            "p3": v.alternate_p3,
            "certificate_pass": v.alternate_cert_pass,
            "certificate_violations": v.alternate_violations,
            "lambda_multiblocked": lambda(&v.alternate_lambda),
            "refused": v.alternate_refusal,
        },
    })
}
