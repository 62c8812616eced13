use serde::{Deserialize, Serialize};

use crate::walk::ReplicaDiagnostics;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Reported but not counted as a failure.
    Flagged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance rule.
    pub rule: String,
    pub status: Status,
}

/// Deterministic experiment summary. Wall-clock time is kept out of the
/// report so that equal configs give equal bytes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config_digest: String,
    pub estimates: Vec<Estimate>,
    pub checks: Vec<Check>,
    pub diagnostics: Option<ReplicaDiagnostics>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config_digest: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config_digest: config_digest.into(),
            ..Self::default()
        }
    }

    pub fn estimate(&mut self, name: &str, value: f64, ci: Option<(f64, f64)>) -> &mut Self {
        self.estimates.push(Estimate { name: name.into(), value, ci });
        self
    }

    pub fn check(&mut self, name: &str, value: f64, rule: impl Into<String>, pass: bool) -> &mut Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), value, rule: rule.into(), status });
        self
    }

    pub fn flag(&mut self, name: &str, value: f64, rule: impl Into<String>) -> &mut Self {
        self.checks.push(Check { name: name.into(), value, rule: rule.into(), status: Status::Flagged });
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get_estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_and_round_trip() {
        let mut r = ExperimentReport::new("x", "abc");
        r.estimate("a", 1.5, Some((1.0, 2.0))).check("c", 0.1, "<= 0.2", true).flag("f", 3.0, "excursion");
        assert!(r.passed());
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        r.check("bad", 1.0, "<= 0", false);
        assert!(!r.passed());
    }
}
