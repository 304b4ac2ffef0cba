//! Machine-readable verification reports.

use serde::{Serialize, Serializer};

use crate::suites::SuiteConfig;

fn residual_value<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// One verified property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    /// The formula or statement the check exercises.
    pub anchor: String,
    pub samples: usize,
    /// Non-finite values are written as the strings `"inf"` or `"nan"`.
    #[serde(serialize_with = "residual_value")]
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Coordinates of the worst sample, kept for failed checks only.
    pub witness: Option<Vec<f64>>,
}

impl CheckRecord {
    pub fn new(
        id: impl Into<String>,
        anchor: impl Into<String>,
        samples: usize,
        max_residual: f64,
        tolerance: f64,
        witness: Option<Vec<f64>>,
    ) -> Self {
        let passed = max_residual <= tolerance;
        Self {
            id: id.into(),
            anchor: anchor.into(),
            samples,
            max_residual,
            tolerance,
            passed,
            witness: if passed { None } else { witness },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    /// Records are sorted by id.
    pub fn new(config: SuiteConfig, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let passed = checks.iter().filter(|c| c.passed).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        Self { config, checks, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }
}
