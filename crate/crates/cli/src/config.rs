//! Experiment configuration: a TOML file whose keys are all optional, with
//! command-line flags layered on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Report encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One JSON document.
    #[default]
    Json,
    /// One row per check.
    Csv,
}

/// Fully resolved configuration; echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Model name, or `all` for the catalog.
    pub model: String,
    /// Master seed.
    pub seed: u64,
    /// Report encoding.
    pub format: Format,
    /// Suites run by `verify`; empty selects every suite that applies.
    pub suites: Vec<String>,
    /// Record wall time in the report.
    pub timing: bool,
    /// Report destination; stdout when absent. Not echoed, so that the same
    /// experiment written to two places yields identical reports.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// `verify` parameters.
    pub verify: VerifyConfig,
    /// `flow` parameters.
    pub flow: FlowConfig,
    /// `reach` parameters.
    pub reach: ReachConfig,
    /// `martin` parameters.
    pub martin: MartinConfig,
    /// `solve` parameters.
    pub solve: SolveConfig,
    /// `kernel` parameters.
    pub kernel: KernelConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            model: "all".into(),
            seed: 2024,
            format: Format::Json,
            suites: Vec::new(),
            timing: false,
            out: None,
            verify: VerifyConfig::default(),
            flow: FlowConfig::default(),
            reach: ReachConfig::default(),
            martin: MartinConfig::default(),
            solve: SolveConfig::default(),
            kernel: KernelConfig::default(),
        }
    }
}

/// Sample counts of the invariant suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random tuples per group-law check.
    pub group_cases: usize,
    /// Random points per field, flow and kernel check.
    pub cases: usize,
    /// Endpoints sampled by the reach suite.
    pub reach_paths: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { group_cases: 1000, cases: 100, reach_paths: 10_000 }
    }
}

/// One constant-control exponential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Control vector; zero when empty.
    pub omega: Vec<f64>,
    /// Duration.
    pub s: f64,
    /// Start point `(x, t)`; the origin when empty.
    pub z0: Vec<f64>,
    /// Path samples written to the table.
    pub samples: usize,
    /// Path table destination.
    pub table: Option<PathBuf>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { omega: Vec::new(), s: 1.0, z0: Vec::new(), samples: 20, table: None }
    }
}

/// Reachability sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReachConfig {
    /// Number of schedules.
    pub paths: usize,
    /// Pieces per schedule.
    pub segments: usize,
    /// Control bound.
    pub omega_bound: f64,
    /// Duration bound.
    pub horizon: f64,
    /// Start point `(x, t)`; the origin when empty.
    pub z0: Vec<f64>,
    /// Membership slack.
    pub slack: f64,
    /// Point-cloud destination.
    pub cloud: Option<PathBuf>,
}

impl Default for ReachConfig {
    fn default() -> Self {
        Self { paths: 10_000, segments: 4, omega_bound: 20.0, horizon: 1.0, z0: Vec::new(), slack: 1e-6, cloud: None }
    }
}

/// Martin-quotient sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MartinConfig {
    /// `exponential`, `zero` or `bounded`.
    pub family: String,
    /// Normalisation time `T`.
    pub base_time: f64,
    /// First direction (`w1`, `w` or `ξ`).
    pub w1: Vec<f64>,
    /// Second direction (`w2` or `η`).
    pub w2: Vec<f64>,
    /// Limit of the pole times for the bounded family.
    pub tau_limit: f64,
    /// Indices `k`.
    pub ks: Vec<usize>,
    /// Sample points `(x, y, t)`.
    pub points: Vec<Vec<f64>>,
    /// Bound on the final error.
    pub bound: f64,
    /// Table destination.
    pub table: Option<PathBuf>,
}

impl Default for MartinConfig {
    fn default() -> Self {
        Self {
            family: "exponential".into(),
            base_time: 0.0,
            w1: vec![0.0],
            w2: vec![1.0 / 3.0],
            tau_limit: 1.0,
            ks: vec![100, 1000, 10_000],
            points: vec![
                vec![1.0, 5.0, -1.0],
                vec![0.5, -1.0, -0.5],
                vec![-0.3, 2.0, -2.0],
                vec![0.0, 0.0, -0.1],
                vec![1.0, 1.0, -1.0],
            ],
            bound: 2e-2,
            table: None,
        }
    }
}

/// Finite-difference Cauchy problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Lower corner of the box.
    pub min: f64,
    /// Upper corner of the box.
    pub max: f64,
    /// Nodes per axis.
    pub points: usize,
    /// `extremal` (`exp(v x_1)`) or `constant`.
    pub initial: String,
    /// Exponent of the extremal data.
    pub v: f64,
    /// Value of the constant data.
    pub value: f64,
    /// Final time.
    pub t_end: f64,
    /// Time step; the CFL bound when absent.
    pub dt: Option<f64>,
    /// `exact` (extremal trace) or `frozen`.
    pub boundary: String,
    /// Margin of the accuracy check.
    pub margin: f64,
    /// Relative interior error bound.
    pub tolerance: f64,
    /// Field destination.
    pub field: Option<PathBuf>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            min: -2.0,
            max: 2.0,
            points: 81,
            initial: "extremal".into(),
            v: 0.5,
            value: 1.0,
            t_end: 0.25,
            dt: None,
            boundary: "exact".into(),
            margin: 0.5,
            tolerance: 1e-3,
            field: None,
        }
    }
}

/// Kernel evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Pole `(ξ, η, τ)`; the origin when empty.
    pub zeta: Vec<f64>,
    /// Evaluation points `(x, y, t)`.
    pub points: Vec<Vec<f64>>,
    /// Finite-difference step of the residual.
    pub h: f64,
    /// Relative residual bound.
    pub tolerance: f64,
    /// Table destination.
    pub table: Option<PathBuf>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            zeta: Vec::new(),
            points: vec![vec![0.3, 0.1, 0.7], vec![0.0, 0.0, 1.0], vec![-0.5, 0.4, 1.5]],
            h: 1e-4,
            tolerance: 1e-4,
            table: None,
        }
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `--model`.
    pub model: Option<String>,
    /// `--suite`, repeatable.
    pub suites: Vec<String>,
    /// `--seed`.
    pub seed: Option<u64>,
    /// `--out`.
    pub out: Option<PathBuf>,
    /// `--format`.
    pub format: Option<Format>,
    /// `--timing`.
    pub timing: bool,
}

impl Config {
    /// Parses TOML text.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a TOML file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies flag overrides.
    pub fn apply(mut self, o: Overrides) -> Self {
        if let Some(m) = o.model {
            self.model = m;
        }
        if !o.suites.is_empty() {
            self.suites = o.suites;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        if let Some(f) = o.format {
            self.format = f;
        }
        self.timing |= o.timing;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml("modle = \"heat\"").is_err());
        assert!(Config::from_toml("[reach]\npath = 3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let c = Config::from_toml("model = \"cmp\"\nseed = 3\n[reach]\npaths = 10").unwrap();
        assert_eq!(c.reach.paths, 10);
        let c = c.apply(Overrides { seed: Some(9), format: Some(Format::Csv), ..Default::default() });
        assert_eq!((c.model.as_str(), c.seed, c.format), ("cmp", 9, Format::Csv));
    }
}
