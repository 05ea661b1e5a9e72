//! Check records and their JSON and CSV encodings.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One measured quantity against its bound. A check passes iff
/// `measured ≤ threshold`; NaN never passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    /// Check identifier, `model/quantity`.
    pub name: String,
    /// Parameters that determine the measurement.
    pub inputs: String,
    /// SHA-256 of `inputs`, hex.
    pub digest: String,
    /// Measured value.
    pub measured: f64,
    /// Upper bound.
    pub threshold: f64,
    /// `measured ≤ threshold`.
    pub passed: bool,
}

impl Check {
    /// `measured ≤ threshold`.
    pub fn at_most(name: impl Into<String>, inputs: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let inputs = inputs.into();
        Self { name: name.into(), digest: digest(&inputs), inputs, measured, threshold, passed: measured <= threshold }
    }

    /// A boolean outcome recorded as 0 (holds) or 1 (fails) against 0.
    pub fn holds(name: impl Into<String>, inputs: impl Into<String>, ok: bool) -> Self {
        Self::at_most(name, inputs, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

/// Hex SHA-256 of a string.
pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pass and fail counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    /// Number of checks.
    pub total: usize,
    /// Checks that passed.
    pub passed: usize,
    /// Checks that failed.
    pub failed: usize,
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    /// Command and suite selection.
    pub suite: String,
    /// Resolved configuration.
    pub config: serde_json::Value,
    /// Checks in a fixed order.
    pub checks: Vec<Check>,
    /// Counts.
    pub summary: Summary,
    /// Elapsed milliseconds; only recorded on request.
    pub wall_time_ms: Option<u64>,
}

impl Report {
    /// Assembles a report and its summary.
    pub fn new(suite: impl Into<String>, config: serde_json::Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.passed).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        Self { suite: suite.into(), config, checks, summary, wall_time_ms: None }
    }

    /// True when every check passed.
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "check", "inputs", "digest", "measured", "threshold", "passed"])
            .expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                self.suite.as_str(),
                &c.name,
                &c.inputs,
                &c.digest,
                &sci(c.measured),
                &sci(c.threshold),
                if c.passed { "true" } else { "false" },
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Seventeen significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}
