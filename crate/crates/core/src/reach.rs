//! Attainable sets: random admissible endpoints and analytic membership.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flows::{self, ControlSchedule};
use crate::math;
use crate::models::{ModelKind, OperatorModel};
use crate::point::Point;

/// Width of the band classified as [`Verdict::Boundary`].
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Classification of a point against an attainable set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Strictly inside.
    Inside,
    /// Within [`BOUNDARY_EPS`] of the boundary.
    Boundary,
    /// Outside.
    Outside,
    /// No oracle for this model.
    Unknown,
}

impl Verdict {
    /// Lower-case label used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Inside => "inside",
            Verdict::Boundary => "boundary",
            Verdict::Outside => "outside",
            Verdict::Unknown => "unknown",
        }
    }
}

/// Verdict plus the smallest constraint slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipVerdict {
    /// Classification.
    pub verdict: Verdict,
    /// Signed slack; NaN when the verdict is unknown.
    pub margin: f64,
}

impl MembershipVerdict {
    fn from_margin(margin: f64) -> Self {
        let verdict = if math::abs(margin) <= BOUNDARY_EPS {
            Verdict::Boundary
        } else if margin > 0.0 {
            Verdict::Inside
        } else {
            Verdict::Outside
        };
        Self { verdict, margin }
    }

    fn unknown() -> Self {
        Self { verdict: Verdict::Unknown, margin: f64::NAN }
    }

    /// True when the point is in the set up to `slack`.
    pub fn within(&self, slack: f64) -> bool {
        self.margin >= -slack
    }
}

/// Sampler parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Number of random schedules.
    pub n_paths: usize,
    /// Pieces per schedule.
    pub segments: usize,
    /// Radius of the `∞`-ball the controls are drawn from.
    pub omega_bound: f64,
    /// Upper bound on the total duration.
    pub horizon: f64,
    /// RNG seed.
    pub seed: u64,
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        if self.segments == 0 {
            return Err(Error::InvalidArgument("segments must be ≥ 1".into()));
        }
        if !(self.omega_bound > 0.0) {
            return Err(Error::NonPositive { what: "omega_bound", value: self.omega_bound });
        }
        if !(self.horizon > 0.0) {
            return Err(Error::NonPositive { what: "horizon", value: self.horizon });
        }
        Ok(())
    }
}

/// Sampled endpoints of admissible paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachCloud {
    /// Start point.
    pub origin: Point,
    /// Index of the schedule behind each endpoint.
    pub ids: Vec<usize>,
    /// Endpoints.
    pub endpoints: Vec<Point>,
    /// Schedules, aligned with `endpoints`.
    pub controls: Vec<ControlSchedule>,
    /// Duration bound.
    pub horizon: f64,
    /// Schedules whose integration blew up.
    pub dropped: usize,
}

/// Draws schedule `index` of the stream selected by `seed`. Each index has
/// its own ChaCha stream, so paths can be generated in any order.
pub fn sample_schedule(m: usize, config: &SamplerConfig, index: usize) -> Result<ControlSchedule> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let piece = config.horizon / config.segments as f64;
    let segments = (0..config.segments)
        .map(|_| {
            let d = (1.0 - rng.gen::<f64>()) * piece;
            let w = (0..m).map(|_| config.omega_bound * (2.0 * rng.gen::<f64>() - 1.0)).collect();
            (d, w)
        })
        .collect();
    ControlSchedule::new(segments)
}

/// Endpoint of one schedule, composed of constant-control exponentials.
pub fn endpoint(model: &OperatorModel, z0: &Point, schedule: &ControlSchedule) -> Result<Point> {
    let mut z = z0.clone();
    for (d, w) in schedule.segments() {
        z = flows::exp_map(model, w, *d, &z)?;
    }
    Ok(z)
}

/// Samples `n_paths` admissible endpoints from `z0`. Paths that blow up are
/// dropped and counted.
pub fn sample_attainable(model: &OperatorModel, z0: &Point, config: &SamplerConfig) -> Result<ReachCloud> {
    config.validate()?;
    model.check_point(z0)?;
    let mut cloud = ReachCloud {
        origin: z0.clone(),
        ids: Vec::with_capacity(config.n_paths),
        endpoints: Vec::with_capacity(config.n_paths),
        controls: Vec::with_capacity(config.n_paths),
        horizon: config.horizon,
        dropped: 0,
    };
    for i in 0..config.n_paths {
        let schedule = sample_schedule(model.m(), config, i)?;
        match endpoint(model, z0, &schedule) {
            Ok(z) => {
                cloud.ids.push(i);
                cloud.endpoints.push(z);
                cloud.controls.push(schedule);
            }
            Err(Error::NonFinite { .. }) => cloud.dropped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(cloud)
}

/// Classifies `z` against the attainable set of `z0`.
///
/// Mumford: `‖(y − y0, w − w0)‖ ≤ t0 − t`. CMP: `t ≤ t0`, `y0 ≤ y`,
/// `(w − w0)² ≤ (y − y0)(t0 − t)`. Driftless models: `t ≤ t0`. Other models
/// return [`Verdict::Unknown`].
pub fn membership(model: &OperatorModel, z0: &Point, z: &Point) -> MembershipVerdict {
    if z0.dim() != model.n() || z.dim() != model.n() {
        return MembershipVerdict::unknown();
    }
    let dt = z0.time - z.time;
    let d = |i: usize| z.spatial[i] - z0.spatial[i];
    match model.kind() {
        ModelKind::Mumford => {
            let r = math::sqrt(d(1) * d(1) + d(2) * d(2));
            MembershipVerdict::from_margin(dt - r)
        }
        ModelKind::Cmp => {
            let (dy, dw) = (d(1), d(2));
            MembershipVerdict::from_margin(dt.min(dy).min(dy * dt - dw * dw))
        }
        ModelKind::Heat | ModelKind::HeisenbergHeat | ModelKind::Grushin | ModelKind::GrushinLifted => {
            MembershipVerdict::from_margin(dt)
        }
        _ => MembershipVerdict::unknown(),
    }
}

/// Driftless membership on the cylinder `box × R`: `t ≤ t0` and `x` inside
/// the box, which must contain `z0`.
pub fn membership_in_box(
    model: &OperatorModel,
    z0: &Point,
    z: &Point,
    bounds: &[(f64, f64)],
) -> Result<MembershipVerdict> {
    if !model.is_driftless() || !model.has_attainable_oracle() {
        return Err(Error::Unsupported { op: "cylinder membership", model: model.name().into() });
    }
    if bounds.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: bounds.len() });
    }
    let slack = |x: &Point| {
        x.spatial.iter().zip(bounds).map(|(v, (lo, hi))| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min)
    };
    if !(slack(z0) > 0.0) {
        return Err(Error::InvalidArgument(format!("z0 is not inside the cylinder {bounds:?}")));
    }
    let base = membership(model, z0, z);
    Ok(MembershipVerdict::from_margin(base.margin.min(slack(z))))
}

/// Fraction of `probes` within `eps` (sup norm) of a cloud endpoint. Every
/// probe must be strictly inside the attainable set of `z0`.
pub fn interior_coverage(
    model: &OperatorModel,
    z0: &Point,
    cloud: &ReachCloud,
    probes: &[Point],
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::NonPositive { what: "eps", value: eps });
    }
    if let Some(bad) = probes.iter().find(|p| membership(model, z0, p).verdict != Verdict::Inside) {
        return Err(Error::InvalidArgument(format!("probe {bad:?} is not an interior point")));
    }
    if probes.is_empty() || cloud.endpoints.is_empty() {
        return Ok(0.0);
    }
    let hit = probes.iter().filter(|p| cloud.endpoints.iter().any(|e| e.sup_distance(p) <= eps)).count();
    Ok(hit as f64 / probes.len() as f64)
}
