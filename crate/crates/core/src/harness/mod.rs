//! Seeded verification campaigns for the measure axioms, the roof and weight
//! bounds and brute-force oracles, with machine-readable violation reports.

mod campaign;
mod oracles;
mod tolerance;

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::linalg::CMat;

pub use campaign::{
    run_axiom_campaign, run_roof_dominance, run_weight_bound, BasisSpec, CampaignConfig, ChannelFamily,
};
pub use oracles::{
    l1_roof_grid_oracle, rel_ent_grid_oracle, robustness_grid_oracle, run_oracle_campaign, weight_grid_oracle,
    OracleConfig, OracleId,
};
pub use tolerance::{ToleranceTable, TOLERANCE_ENV};

/// JSON has no infinities or NaN; failed checks carry them, so they travel
/// as the strings `"inf"`, `"-inf"` and `"nan"`.
mod extended_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *x {
            x if x.is_finite() => s.serialize_f64(x),
            x if x.is_nan() => s.serialize_str("nan"),
            x if x > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("expected a number, got `{other}`"))),
            },
        }
    }
}

/// Which property a report covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxiomTag {
    S1,
    S2,
    S3,
    S4,
    C2,
    C4,
    #[serde(rename = "ORACLE")]
    Oracle,
}

impl fmt::Display for AxiomTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AxiomTag::S1 => "S1",
            AxiomTag::S2 => "S2",
            AxiomTag::S3 => "S3",
            AxiomTag::S4 => "S4",
            AxiomTag::C2 => "C2",
            AxiomTag::C4 => "C4",
            AxiomTag::Oracle => "ORACLE",
        };
        f.write_str(s)
    }
}

/// One failed check. `slack = lhs − rhs`; a violation has slack above the
/// report tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub seed: u64,
    pub digest: String,
    #[serde(with = "extended_float")]
    pub lhs: f64,
    #[serde(with = "extended_float")]
    pub rhs: f64,
    #[serde(with = "extended_float")]
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: AxiomTag,
    pub trials: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    #[serde(with = "extended_float")]
    pub max_slack: f64,
}

impl AxiomReport {
    pub(crate) fn new(axiom: AxiomTag, tolerance: f64) -> Self {
        Self { axiom, trials: 0, tolerance, violations: Vec::new(), max_slack: f64::NEG_INFINITY }
    }

    /// Records a check `lhs ≤ rhs`.
    pub(crate) fn check(&mut self, trial: usize, seed: u64, digest: &str, lhs: f64, rhs: f64) {
        self.trials += 1;
        let slack = lhs - rhs;
        self.max_slack = self.max_slack.max(slack);
        if !(slack <= self.tolerance) {
            self.violations.push(Violation { trial, seed, digest: digest.into(), lhs, rhs, slack, error: None });
        }
    }

    /// A check that could not be evaluated counts as a violation.
    pub(crate) fn failed(&mut self, trial: usize, seed: u64, digest: &str, error: String) {
        self.trials += 1;
        self.max_slack = f64::INFINITY;
        self.violations.push(Violation {
            trial,
            seed,
            digest: digest.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::INFINITY,
            error: Some(error),
        });
    }

    pub(crate) fn finish(mut self) -> Self {
        self.violations.sort_by_key(|v| v.trial);
        if self.trials == 0 {
            self.max_slack = 0.0;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All reports of one campaign with the configuration that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub measure: String,
    pub configuration: String,
    pub note: String,
    pub reports: Vec<AxiomReport>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(AxiomReport::passed)
    }

    pub fn violation_count(&self) -> usize {
        self.reports.iter().map(|r| r.violations.len()).sum()
    }

    pub fn report(&self, axiom: AxiomTag) -> Option<&AxiomReport> {
        self.reports.iter().find(|r| r.axiom == axiom)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Fixed-width text summary followed by up to ten violations per axiom.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "measure: {}  ({})", self.measure, self.configuration);
        let _ = writeln!(out, "{}", self.note);
        let _ = writeln!(
            out,
            "{:<7} {:>7} {:>10} {:>11} {:>18}  status",
            "axiom", "trials", "tolerance", "violations", "max_slack"
        );
        for r in &self.reports {
            let _ = writeln!(
                out,
                "{:<7} {:>7} {:>10.1e} {:>11} {:>18.11e}  {}",
                r.axiom.to_string(),
                r.trials,
                r.tolerance,
                r.violations.len(),
                r.max_slack,
                if r.passed() { "pass" } else { "FAIL" }
            );
        }
        for r in &self.reports {
            for v in r.violations.iter().take(10) {
                let _ = writeln!(
                    out,
                    "  {} trial {} seed {} [{}] lhs {:.11e} rhs {:.11e} slack {:.3e}{}",
                    r.axiom,
                    v.trial,
                    v.seed,
                    v.digest,
                    v.lhs,
                    v.rhs,
                    v.slack,
                    v.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                );
            }
        }
        out
    }
}

/// Short SHA-256 fingerprint of the matrices and scalars of a trial.
pub(crate) fn digest(matrices: &[&CMat], scalars: &[f64]) -> String {
    let mut h = Sha256::new();
    for m in matrices {
        h.update((m.nrows() as u64).to_le_bytes());
        h.update((m.ncols() as u64).to_le_bytes());
        for z in m.iter() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
    }
    for x in scalars {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}
