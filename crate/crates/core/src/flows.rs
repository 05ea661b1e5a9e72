//! Admissible paths and flow identities.
//!
//! Paths solve `γ' = Σ ω_j X_j(γ) + Y(γ)` with piecewise-constant `ω`. The
//! drift forces `t' = −1`, so the time coordinate is set exactly from the
//! path parameter instead of being integrated.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::math;
use crate::models::OperatorModel;
use crate::point::Point;

/// Default RK4 step of [`exp_map_rk4`].
pub const DEFAULT_STEP: f64 = 1e-3;

/// Piecewise-constant control: ordered `(duration, ω)` pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    segments: Vec<(f64, Vec<f64>)>,
}

impl ControlSchedule {
    /// Validates that every duration is positive and finite and all controls
    /// share one length.
    pub fn new(segments: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("a schedule needs at least one segment".into()));
        }
        let m = segments[0].1.len();
        for (d, w) in &segments {
            if !(d.is_finite() && *d > 0.0) {
                return Err(Error::NonPositive { what: "segment duration", value: *d });
            }
            if w.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: w.len() });
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("control values must be finite".into()));
            }
        }
        Ok(Self { segments })
    }

    /// A single segment.
    pub fn constant(omega: Vec<f64>, duration: f64) -> Result<Self> {
        Self::new(vec![(duration, omega)])
    }

    /// The pieces.
    pub fn segments(&self) -> &[(f64, Vec<f64>)] {
        &self.segments
    }

    /// `Σ` durations.
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|(d, _)| d).sum()
    }

    /// Control dimension.
    pub fn control_dim(&self) -> usize {
        self.segments[0].1.len()
    }
}

/// A discrete admissible path.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// `(s, γ(s))` with `s` strictly increasing from 0.
    pub samples: Vec<(f64, Point)>,
    /// Nominal RK4 step.
    pub step: f64,
}

impl Path {
    /// `γ` at the final parameter.
    pub fn endpoint(&self) -> &Point {
        &self.samples.last().expect("paths hold at least the start point").1
    }
}

/// One classical RK4 step of size `h` for `p' = f(p)`.
pub fn rk4_step(f: &VectorField, p: &[f64], h: f64) -> Vec<f64> {
    let shift = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + c * y).collect() };
    let k1 = f.eval(p);
    let k2 = f.eval(&shift(p, &k1, 0.5 * h));
    let k3 = f.eval(&shift(p, &k2, 0.5 * h));
    let k4 = f.eval(&shift(p, &k3, h));
    (0..p.len()).map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Flow of `field` for parameter `tau` (either sign) from `p`, in `steps`
/// equal RK4 steps.
pub fn flow_spacetime(field: &VectorField, tau: f64, p: &[f64], steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    let h = tau / steps as f64;
    let mut q = p.to_vec();
    for _ in 0..steps {
        q = rk4_step(field, &q, h);
    }
    q
}

/// Integrates an admissible path with RK4. Each segment of duration `d` is
/// split into `⌈d/step⌉` equal substeps, so segment boundaries are hit
/// exactly.
pub fn integrate_admissible(model: &OperatorModel, control: &ControlSchedule, z0: &Point, step: f64) -> Result<Path> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::NonPositive { what: "step", value: step });
    }
    model.check_point(z0)?;
    model.check_control(&control.segments[0].1)?;
    let mut samples = vec![(0.0, z0.clone())];
    let mut p = z0.to_vec();
    let t0 = z0.time;
    let mut s0 = 0.0;
    for (d, omega) in &control.segments {
        let field = model.control_field(omega)?;
        let n_sub = math::ceil(d / step).max(1.0) as usize;
        let h = d / n_sub as f64;
        for i in 1..=n_sub {
            p = rk4_step(&field, &p, h);
            let s = if i == n_sub { s0 + d } else { s0 + i as f64 * h };
            let last = p.len() - 1;
            p[last] = t0 - s;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { at: s });
            }
            samples.push((s, Point::from_slice(&p)));
        }
        s0 += d;
    }
    Ok(Path { samples, step })
}

/// How an exponential is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// The model's closed form, falling back to RK4 when none is known.
    ClosedForm,
    /// RK4 with step `min(1e-3, s/100)`.
    Rk4,
}

/// `exp(s(ω·X + Y)) z0` for `s ≥ 0`. Returns `z0` for `s = 0`.
pub fn exp_map(model: &OperatorModel, omega: &[f64], s: f64, z0: &Point) -> Result<Point> {
    exp_with(model, omega, s, z0, Integrator::ClosedForm)
}

/// [`exp_map`] forced through RK4.
pub fn exp_map_rk4(model: &OperatorModel, omega: &[f64], s: f64, z0: &Point) -> Result<Point> {
    exp_with(model, omega, s, z0, Integrator::Rk4)
}

/// [`exp_map`] with an explicit integrator choice.
pub fn exp_with(model: &OperatorModel, omega: &[f64], s: f64, z0: &Point, integrator: Integrator) -> Result<Point> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::NegativeDuration(s));
    }
    model.check_point(z0)?;
    model.check_control(omega)?;
    if s == 0.0 {
        return Ok(z0.clone());
    }
    if integrator == Integrator::ClosedForm {
        if let Some(z) = model.exp_closed_form(omega, s, z0) {
            return if z.is_finite() { Ok(z) } else { Err(Error::NonFinite { at: s }) };
        }
    }
    let step = DEFAULT_STEP.min(s / 100.0);
    let schedule = ControlSchedule::constant(omega.to_vec(), s)?;
    Ok(integrate_admissible(model, &schedule, z0, step)?.endpoint().clone())
}

/// `‖exp(s(ω·X+Y)) z0 − z0 ∘ exp(s(ω·X+Y)) e‖∞`.
pub fn right_translation_residual(model: &OperatorModel, omega: &[f64], s: f64, z0: &Point) -> Result<f64> {
    let law = model.law();
    let direct = exp_map(model, omega, s, z0)?;
    let from_identity = exp_map(model, omega, s, &law.identity())?;
    Ok(direct.sup_distance(&law.compose(z0, &from_identity)?))
}

/// The four-leg Heisenberg loop with controls `c e_1, c e_2, −c e_1, −c e_2`
/// (applied in that order), each for parameter `s`. Ends at
/// `(x, y, z + c²s², t − 4s)`.
pub fn heisenberg_loop(c: f64, s: f64, z0: &Point, integrator: Integrator) -> Result<Point> {
    let model = OperatorModel::heisenberg_heat();
    let mut z = z0.clone();
    for omega in [[c, 0.0], [0.0, c], [-c, 0.0], [0.0, -c]] {
        z = exp_with(&model, &omega, s, &z, integrator)?;
    }
    Ok(z)
}

/// Endpoints of the Mumford loop with `ω = 2π/s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MumfordLoop {
    /// `exp(s(ωX + Y)) z0`, expected `(x + 2π, y, w, t − s)`.
    pub forward: Point,
    /// `exp(s(−ωX + Y))` applied to `forward`, expected `(x, y, w, t − 2s)`.
    pub round_trip: Point,
}

/// Runs the Mumford loop from `z0`.
pub fn mumford_loop(s: f64, z0: &Point, integrator: Integrator) -> Result<MumfordLoop> {
    if !(s > 0.0) {
        return Err(Error::NonPositive { what: "s", value: s });
    }
    let model = OperatorModel::mumford();
    let w = 2.0 * core::f64::consts::PI / s;
    let forward = exp_with(&model, &[w], s, z0, integrator)?;
    let round_trip = exp_with(&model, &[-w], s, &forward, integrator)?;
    Ok(MumfordLoop { forward, round_trip })
}

/// The chain `z0, exp(s(ω·X+Y)) z0, …` with `k + 1` points.
pub fn harnack_chain(model: &OperatorModel, omega: &[f64], s: f64, k: usize, z0: &Point) -> Result<Vec<Point>> {
    if k == 0 {
        return Err(Error::InvalidArgument("chain length k must be ≥ 1".into()));
    }
    let mut chain = Vec::with_capacity(k + 1);
    chain.push(z0.clone());
    for i in 0..k {
        let next = exp_map(model, omega, s, &chain[i])?;
        chain.push(next);
    }
    Ok(chain)
}

/// Mean and spread of the ratios `u(exp(s(ω·X+Y)) z_i) / u(z_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationStats {
    /// Mean ratio.
    pub mean: f64,
    /// `max_i |r_i − mean|`.
    pub max_deviation: f64,
}

/// Separation ratios of `u` along the constant-control flow.
pub fn separation_ratio<U>(
    model: &OperatorModel,
    u: U,
    omega: &[f64],
    s: f64,
    samples: &[Point],
) -> Result<SeparationStats>
where
    U: Fn(&Point) -> f64,
{
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let mut ratios = Vec::with_capacity(samples.len());
    for z in samples {
        let base = u(z);
        if !(base > 0.0) {
            return Err(Error::Vanishing);
        }
        ratios.push(u(&exp_map(model, omega, s, z)?) / base);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_deviation = ratios.iter().map(|r| math::abs(r - mean)).fold(0.0, f64::max);
    Ok(SeparationStats { mean, max_deviation })
}

/// RK4 steps per leg of the commutator loops.
const LOOP_STEPS: usize = 64;

fn commutator_loop(a: &VectorField, b: &VectorField, s: f64, p: &[f64]) -> Vec<f64> {
    let mut q = flow_spacetime(b, s, p, LOOP_STEPS);
    q = flow_spacetime(a, s, &q, LOOP_STEPS);
    q = flow_spacetime(b, -s, &q, LOOP_STEPS);
    flow_spacetime(a, -s, &q, LOOP_STEPS)
}

fn loop_residual(a: &VectorField, b: &VectorField, s: f64, z0: &Point) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::NonPositive { what: "s", value: s });
    }
    let p = z0.to_vec();
    let end = commutator_loop(a, b, s, &p);
    let expected = b.bracket(a)?.eval(&p);
    Ok((0..p.len()).map(|i| math::abs((end[i] - p[i]) / (s * s) - expected[i])).fold(0.0, f64::max))
}

/// Commutator loop of `A = X_j` and `B = X_k` (index `m` stands for `Y`):
/// flows `B`, `A`, `−B`, `−A` for parameter `s` each. Returns
/// `‖(end − z0)/s² − [B, A](z0)‖∞`, which is `O(s)`.
pub fn bch_loop_residual(model: &OperatorModel, j: usize, k: usize, s: f64, z0: &Point) -> Result<f64> {
    model.check_point(z0)?;
    let pick = |i: usize| -> Result<VectorField> {
        match i.cmp(&model.m()) {
            core::cmp::Ordering::Less => Ok(model.generator_spacetime(i)),
            core::cmp::Ordering::Equal => Ok(model.drift()),
            core::cmp::Ordering::Greater => Err(Error::IndexOutOfRange { index: i, len: model.m() + 1 }),
        }
    };
    loop_residual(&pick(j)?, &pick(k)?, s, z0)
}

/// [`bch_loop_residual`] for `A = ω_a·X + Y`, `B = ω_b·X + Y`. The legs cancel
/// in time, so no time shift has to be removed.
pub fn bch_loop_residual_controls(
    model: &OperatorModel,
    omega_a: &[f64],
    omega_b: &[f64],
    s: f64,
    z0: &Point,
) -> Result<f64> {
    model.check_point(z0)?;
    let a = model.control_field(omega_a)?;
    let b = model.control_field(omega_b)?;
    loop_residual(&a, &b, s, z0)
}

/// The raw loop increment `(end − z0)/s²` for `A = ω_a·X + Y`, `B = ω_b·X + Y`.
pub fn bch_loop_increment(
    model: &OperatorModel,
    omega_a: &[f64],
    omega_b: &[f64],
    s: f64,
    z0: &Point,
) -> Result<Vec<f64>> {
    model.check_point(z0)?;
    let a = model.control_field(omega_a)?;
    let b = model.control_field(omega_b)?;
    let p = z0.to_vec();
    let end = commutator_loop(&a, &b, s, &p);
    Ok(end.iter().zip(&p).map(|(e, q)| (e - q) / (s * s)).collect())
}
