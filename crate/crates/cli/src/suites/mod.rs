//! Invariant suites run by `verify`. Each suite measures one family of
//! properties for one model and returns its checks in a fixed order.

mod algebra;
mod analysis;
mod dynamics;

use std::fmt;
use std::str::FromStr;

use hypoelliptic::{ModelKind, OperatorModel, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::report::Check;
use crate::CliError;

pub use analysis::{extremal_data, heat_mass, interior_error, kolmogorov_points, run_solve, SolveRun};

/// A named family of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    /// Group axioms, dilations, layers.
    Groups,
    /// Brackets, Hörmander rank, left invariance.
    Fields,
    /// Exponentials, semigroup, right translation, chains.
    Flows,
    /// Heisenberg and Mumford loop identities.
    Loops,
    /// Sampled endpoints against the attainable-set oracles.
    Reach,
    /// Fundamental solutions.
    Kernel,
    /// Martin quotients and their limits.
    Martin,
    /// Finite-difference solver and extremal catalog.
    Solver,
    /// Separation ratios and the Ornstein–Uhlenbeck minimal solution.
    Separation,
}

impl Suite {
    /// Every suite in report order.
    pub const ALL: [Suite; 9] = [
        Suite::Groups,
        Suite::Fields,
        Suite::Flows,
        Suite::Loops,
        Suite::Reach,
        Suite::Kernel,
        Suite::Martin,
        Suite::Solver,
        Suite::Separation,
    ];

    /// Name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Suite::Groups => "groups",
            Suite::Fields => "fields",
            Suite::Flows => "flows",
            Suite::Loops => "loops",
            Suite::Reach => "reach",
            Suite::Kernel => "kernel",
            Suite::Martin => "martin",
            Suite::Solver => "solver",
            Suite::Separation => "separation",
        }
    }

    /// Whether the suite has anything to measure on `model`.
    pub fn applies(self, model: &OperatorModel) -> bool {
        match self {
            Suite::Groups | Suite::Fields | Suite::Flows => true,
            Suite::Loops => matches!(model.kind(), ModelKind::HeisenbergHeat | ModelKind::Mumford),
            Suite::Reach => model.has_attainable_oracle(),
            Suite::Kernel => matches!(model.kind(), ModelKind::Kolmogorov | ModelKind::Heat),
            Suite::Martin => model.kind() == ModelKind::Kolmogorov,
            Suite::Solver => model.has_extremal_catalog() || analysis::has_scheme(model),
            Suite::Separation => model.has_extremal_catalog() || model.kind() == ModelKind::OrnsteinUhlenbeck,
        }
    }

    /// Runs the suite. The RNG stream depends on the suite only, so results
    /// do not depend on which other suites run.
    pub fn run(self, model: &OperatorModel, config: &Config) -> Result<Vec<Check>, CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(self as u64);
        let mut ctx = Ctx { model, config, rng, checks: Vec::new() };
        match self {
            Suite::Groups => algebra::groups(&mut ctx)?,
            Suite::Fields => algebra::fields(&mut ctx)?,
            Suite::Flows => dynamics::flows(&mut ctx)?,
            Suite::Loops => dynamics::loops(&mut ctx)?,
            Suite::Reach => dynamics::reach(&mut ctx)?,
            Suite::Kernel => analysis::kernel(&mut ctx)?,
            Suite::Martin => analysis::martin(&mut ctx)?,
            Suite::Solver => analysis::solver(&mut ctx)?,
            Suite::Separation => analysis::separation(&mut ctx)?,
        }
        Ok(ctx.checks)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| CliError::Config(format!("unknown suite `{s}`")))
    }
}

/// State shared by the checks of one suite run.
pub(crate) struct Ctx<'a> {
    pub model: &'a OperatorModel,
    pub config: &'a Config,
    pub rng: ChaCha8Rng,
    pub checks: Vec<Check>,
}

impl Ctx<'_> {
    /// Records `measured ≤ threshold` under `model/name`.
    pub fn at_most(&mut self, name: &str, inputs: String, measured: f64, threshold: f64) {
        let full = format!("{}/{name}", self.model.name());
        let inputs = format!("model={} seed={} {inputs}", self.model.name(), self.config.seed);
        self.checks.push(Check::at_most(full, inputs, measured, threshold));
    }

    /// Records a boolean outcome under `model/name`.
    pub fn holds(&mut self, name: &str, inputs: String, ok: bool) {
        self.at_most(name, inputs, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    /// Uniform point in `[−r, r]^{N+1}`.
    pub fn point(&mut self, r: f64) -> Point {
        random_point(&mut self.rng, self.model.n(), r)
    }

    /// Uniform control in `[−r, r]^m`.
    pub fn control(&mut self, r: f64) -> Vec<f64> {
        (0..self.model.m()).map(|_| self.rng.gen_range(-r..r)).collect()
    }

    pub fn cases(&self) -> usize {
        self.config.verify.cases
    }
}

pub(crate) fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Point {
    Point::new((0..n).map(|_| rng.gen_range(-r..r)).collect(), rng.gen_range(-r..r))
}

/// Largest of `1` and the sup norms of `points`.
pub(crate) fn scale(points: &[&Point]) -> f64 {
    points.iter().map(|p| p.sup_norm()).fold(1.0, f64::max)
}
