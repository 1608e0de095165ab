//! Flip-probability schedules: presets, JSON serialization, and the exact
//! certificate of the schedule properties the contraction analysis needs.

use num_traits::Zero;
use serde::Deserialize;

use crate::rational::{parse_rational, rat, render_exact, Rat};
use crate::{Error, Result};

/// Flip probabilities P_1, P_2, ... (index 0 holds P_1) plus the metric
/// weight parameter eta. Entries lie in [0, 1]; eta in [0, 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipSchedule {
    p: Vec<Rat>,
    eta: Rat,
}

#[derive(Deserialize)]
struct ScheduleFile {
    #[serde(rename = "P")]
    p: Vec<String>,
    eta: String,
}

impl FlipSchedule {
    pub fn new(p: Vec<Rat>, eta: Rat) -> Result<Self> {
        let one = rat(1, 1);
        for (i, value) in p.iter().enumerate() {
            if value < &Rat::zero() || value > &one {
                return Err(Error::Config(format!(
                    "P_{} = {} outside [0, 1]",
                    i + 1,
                    render_exact(value)
                )));
            }
        }
        if eta < Rat::zero() || eta >= one {
            return Err(Error::Config(format!(
                "eta = {} outside [0, 1)",
                render_exact(&eta)
            )));
        }
        Ok(FlipSchedule { p, eta })
    }

    /// P_ell; zero beyond the stored entries and for ell = 0.
    pub fn probability(&self, ell: usize) -> Rat {
        if ell == 0 || ell > self.p.len() {
            Rat::zero()
        } else {
            self.p[ell - 1].clone()
        }
    }

    /// Gap P_ell - P_{ell+1}.
    pub fn gap(&self, ell: usize) -> Rat {
        self.probability(ell) - self.probability(ell + 1)
    }

    /// Largest ell with P_ell > 0 (0 when all entries vanish).
    pub fn support(&self) -> usize {
        (1..=self.p.len())
            .rev()
            .find(|&ell| !self.p[ell - 1].is_zero())
            .unwrap_or(0)
    }

    pub fn eta(&self) -> &Rat {
        &self.eta
    }

    pub fn probabilities(&self) -> &[Rat] {
        &self.p
    }

    /// Headline schedule: P = (1, 0.324, 0.154, 0.088, 0.044, 0.011),
    /// eta = 0.0469.
    pub fn setting_1_1() -> Self {
        Self::from_strs(&["1", "0.324", "0.154", "0.088", "0.044", "0.011"], "0.0469")
    }

    /// Variant with P_3 = 0.1539; violates the FP3 inequality at j = 4.
    pub fn setting_1_1_alt() -> Self {
        Self::from_strs(
            &["1", "0.324", "0.1539", "0.088", "0.044", "0.011"],
            "0.0469",
        )
    }

    /// Single-site recoloring: P = (1), eta = 0.
    pub fn glauber() -> Self {
        Self::from_strs(&["1"], "0")
    }

    /// Classic six-term schedule: (1, 13/42, 1/6, 2/21, 1/21, 1/84), eta = 0.
    pub fn vigoda() -> Self {
        Self::from_strs(&["1", "13/42", "1/6", "2/21", "1/21", "1/84"], "0")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "setting-1.1" => Some(Self::setting_1_1()),
            "setting-1.1-alt" => Some(Self::setting_1_1_alt()),
            "glauber" => Some(Self::glauber()),
            "vigoda" => Some(Self::vigoda()),
            _ => None,
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["setting-1.1", "setting-1.1-alt", "glauber", "vigoda"]
    }

    fn from_strs(p: &[&str], eta: &str) -> Self {
        let p = p
            .iter()
            .map(|s| parse_rational(s).expect("preset literal"))
            .collect();
        FlipSchedule::new(p, parse_rational(eta).expect("preset literal")).expect("preset valid")
    }

    /// Parses `{"P": ["1", "0.324", ...], "eta": "0.0469"}`. Entries accept
    /// decimal strings or `num/den`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("schedule JSON: {e}"),
        })?;
        let p = file
            .p
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<Rat>>>()?;
        let eta = parse_rational(&file.eta)?;
        FlipSchedule::new(p, eta)
    }

    pub fn to_json_string(&self) -> String {
        let p: Vec<serde_json::Value> = self
            .p
            .iter()
            .map(|v| serde_json::Value::String(render_exact(v)))
            .collect();
        serde_json::json!({ "P": p, "eta": render_exact(&self.eta) }).to_string()
    }
}

/// Outcome of one certificate inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyStatus {
    HoldsStrict,
    HoldsWithEquality,
    Violated,
}

/// One instantiated inequality of the schedule certificate.
#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub label: String,
    pub statement: String,
    pub status: PropertyStatus,
}

impl PropertyCheck {
    pub fn holds(&self) -> bool {
        self.status != PropertyStatus::Violated
    }
}

/// Full certificate: every inequality instantiated and compared exactly.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<PropertyCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(PropertyCheck::holds)
    }

    pub fn find(&self, label: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    pub fn violations(&self) -> Vec<&PropertyCheck> {
        self.checks.iter().filter(|c| !c.holds()).collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let mark = match check.status {
                PropertyStatus::HoldsStrict => "ok ",
                PropertyStatus::HoldsWithEquality => "ok=",
                PropertyStatus::Violated => "VIOLATED",
            };
            out.push_str(&format!(
                "{:<9} {:<10} {}\n",
                mark, check.label, check.statement
            ));
        }
        out
    }
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

/// Checks the eight schedule properties (FP0..FP7) in exact arithmetic,
/// reporting each sub-inequality with strict/equality/violated status.
pub fn validate_schedule(s: &FlipSchedule) -> ValidationReport {
    let p = |j: usize| s.probability(j);
    let g = |j: usize| s.gap(j);
    let ex = render_exact;
    let mut checks = Vec::new();
    let top = s.support().max(6) + 1;

    checks.push(check_eq(
        "FP0(P1)",
        &p(1),
        &rat(1, 1),
        format!("P_1 = {} must equal 1", ex(&p(1))),
    ));
    checks.push(check_le(
        "FP0(P2)",
        &p(2),
        &rat(1, 3),
        format!("P_2 = {} <= 1/3", ex(&p(2))),
    ));
    checks.push(check_eq(
        "FP0(P7)",
        &p(7),
        &Rat::zero(),
        format!("P_7 = {} must equal 0", ex(&p(7))),
    ));
    for j in 3..=top {
        let bound = rat(2, 3) * p(j - 1);
        checks.push(check_le(
            format!("FP1(j={j})"),
            &p(j),
            &bound,
            format!("P_{j} = {} <= (2/3) P_{} = {}", ex(&p(j)), j - 1, ex(&bound)),
        ));
    }
    checks.push(check_le(
        "FP2(a)",
        &g(2),
        &(rat(1, 1) - p(2)),
        format!(
            "P_2 - P_3 = {} <= 1 - P_2 = {}",
            ex(&g(2)),
            ex(&(rat(1, 1) - p(2)))
        ),
    ));
    checks.push(check_le(
        "FP2(b)",
        &(rat(2, 1) * g(3)),
        &g(2),
        format!(
            "2(P_3 - P_4) = {} <= P_2 - P_3 = {}",
            ex(&(rat(2, 1) * g(3))),
            ex(&g(2))
        ),
    ));
    for j in 4..=top.max(4) {
        let lhs = rat(j as i64 - 1, 1) * g(j);
        let rhs = rat(2, 1) * g(3);
        checks.push(check_le(
            format!("FP3(j={j})"),
            &lhs,
            &rhs,
            format!(
                "({})(P_{j} - P_{}) = {} <= 2(P_3 - P_4) = {}",
                j - 1,
                j + 1,
                ex(&lhs),
                ex(&rhs)
            ),
        ));
    }
    checks.push(check_le(
        "FP4(a)",
        &g(5),
        &g(4),
        format!("P_5 - P_6 = {} <= P_4 - P_5 = {}", ex(&g(5)), ex(&g(4))),
    ));
    checks.push(check_le(
        "FP4(b)",
        &g(6),
        &g(5),
        format!("P_6 - P_7 = {} <= P_5 - P_6 = {}", ex(&g(6)), ex(&g(5))),
    ));
    checks.push(check_le(
        "FP5",
        &(rat(2, 1) * p(2)),
        &(rat(1, 1) - rat(4, 1) * p(4)),
        format!(
            "2 P_2 = {} <= 1 - 4 P_4 = {}",
            ex(&(rat(2, 1) * p(2))),
            ex(&(rat(1, 1) - rat(4, 1) * p(4)))
        ),
    ));
    checks.push(check_le(
        "FP6",
        &(rat(2, 1) * p(3)),
        &(rat(4, 1) * p(4) - p(5)),
        format!(
            "2 P_3 = {} <= 4 P_4 - P_5 = {}",
            ex(&(rat(2, 1) * p(3))),
            ex(&(rat(4, 1) * p(4) - p(5)))
        ),
    ));
    checks.push(check_le(
        "FP7",
        s.eta(),
        &(rat(6, 19) * p(2)),
        format!(
            "eta = {} <= (6/19) P_2 = {}",
            ex(s.eta()),
            ex(&(rat(6, 19) * p(2)))
        ),
    ));
    ValidationReport { checks }
}
