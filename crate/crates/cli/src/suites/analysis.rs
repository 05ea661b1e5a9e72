use std::f64::consts::PI;

use hypoelliptic::flows::separation_ratio;
use hypoelliptic::kernels::stationary_residual;
use hypoelliptic::kernels::{
    convergence_rate, heat_kernel, kernel_invariance_residual, kolmogorov_kernel, kolmogorov_mass,
    martin_limit_predicted, martin_quotient, ou_minimal, pde_residual, MartinFamily, MartinSequence,
};
use hypoelliptic::quadrature::{simpson, simpson_2d};
use hypoelliptic::solver::{
    cfl_bound, extremal, extremal_support, liouville_growth_check, solve_cauchy, solve_cauchy_with,
    y_independence_deviation, Axis, Boundary, GridField, SolveOptions, StationaryMixture,
};
use hypoelliptic::{ModelKind, OperatorModel, Point};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Ctx;
use crate::CliError;

/// Step of the residual checks on exact solutions; the default step leaves
/// a truncation error near `1e−6`.
const EXACT_H: f64 = 1e-4;

pub(crate) fn has_scheme(model: &OperatorModel) -> bool {
    match model.kind() {
        ModelKind::Heat => model.n() <= 2,
        ModelKind::Kolmogorov => model.n() == 2,
        ModelKind::Grushin => true,
        _ => false,
    }
}

/// Points within one standard deviation of the kernel centre at times in `[0.5, 2]`.
pub fn kolmogorov_points(rng: &mut ChaCha8Rng, m: usize, count: usize) -> Vec<Point> {
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(0.5..2.0);
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0) * (2.0 * t).sqrt()).collect();
            let y: Vec<f64> =
                x.iter().map(|x| -0.5 * t * x + rng.gen_range(-1.0..1.0) * (t * t * t / 6.0).sqrt()).collect();
            Point::new([x, y].concat(), t)
        })
        .collect()
}

/// Total mass of the heat kernel on `R^n` (`n ≤ 2`) at time `t`.
pub fn heat_mass(n: usize, t: f64) -> Result<f64, CliError> {
    let l = 12.0 * (2.0 * t).sqrt();
    let k = |x: Vec<f64>| heat_kernel(n, &Point::new(x, t), &Point::origin(n)).map(|v| v.value()).unwrap_or(f64::NAN);
    match n {
        1 => Ok(simpson(|x| k(vec![x]), -l, l, 1e-12)),
        2 => Ok(simpson_2d(|x, y| k(vec![x, y]), -l, l, |_| (-l, l), 1e-12)),
        _ => Err(CliError::Config(format!("heat mass is computed for n ≤ 2, not {n}"))),
    }
}

pub(crate) fn kernel(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let cases = ctx.cases();
    match model.kind() {
        ModelKind::Kolmogorov => {
            let m = model.m();
            let zeta = Point::origin(2 * m);
            let gamma = |z: &Point| kolmogorov_kernel(m, z, &zeta).map(|k| k.value()).unwrap_or(f64::NAN);
            let mut worst = 0.0f64;
            for z in kolmogorov_points(&mut ctx.rng, m, cases) {
                worst = worst.max(pde_residual(model, gamma, &z, EXACT_H)?.abs() / gamma(&z));
            }
            ctx.at_most("kernel pde residual (relative)", format!("cases={cases} h={EXACT_H}"), worst, 1e-4);

            let mut inv = 0.0f64;
            for _ in 0..cases {
                let g = ctx.point(1.0);
                let zeta = ctx.point(1.0);
                let mut z = ctx.point(1.0);
                z.time = zeta.time + ctx.rng.gen_range(0.2..1.5);
                inv = inv.max(kernel_invariance_residual(m, &g, &z, &zeta)?);
            }
            ctx.at_most("translation and dilation invariance", format!("cases={cases}"), inv, 1e-10);

            let mut vanishes = true;
            for _ in 0..cases {
                let zeta = ctx.point(3.0);
                let mut z = ctx.point(3.0);
                z.time = zeta.time - ctx.rng.gen_range(0.0..3.0);
                vanishes &= kolmogorov_kernel(m, &z, &zeta)?.value() == 0.0;
            }
            ctx.holds("zero for t <= tau", format!("cases={cases}"), vanishes);

            if m == 1 {
                let mass = kolmogorov_mass(1.0, 1e-9)?;
                let target = (2.0 * PI).sqrt();
                ctx.at_most("mass / sqrt(2 pi) - 1", "t=1 tol=1e-9".into(), (mass / target - 1.0).abs(), 0.01);
                ctx.holds("mass differs from 1", format!("mass={mass:.16e}"), (mass - 1.0).abs() > 0.5);
            }
        }
        ModelKind::Heat if model.n() <= 2 => {
            let n = model.n();
            let mass = heat_mass(n, 0.7)?;
            ctx.at_most("mass - 1", "t=0.7".into(), (mass - 1.0).abs(), 1e-6);
            let origin = Point::origin(n);
            let k = |z: &Point| heat_kernel(n, z, &origin).map(|v| v.value()).unwrap_or(f64::NAN);
            let mut worst = 0.0f64;
            for _ in 0..cases {
                let mut z = ctx.point(1.0);
                z.time = ctx.rng.gen_range(0.5..2.0);
                worst = worst.max(pde_residual(model, k, &z, EXACT_H)?.abs() / k(&z));
            }
            ctx.at_most("kernel pde residual (relative)", format!("cases={cases} h={EXACT_H}"), worst, 1e-4);
        }
        _ => {}
    }
    Ok(())
}

/// `(x, y, t)` sample points for block size `m`, each coordinate repeated across the block.
fn martin_points(m: usize) -> Vec<Point> {
    [(1.0, 5.0, -1.0), (0.5, -1.0, -0.5), (-0.3, 2.0, -2.0), (0.0, 0.0, -0.1), (1.0, 1.0, -1.0)]
        .into_iter()
        .map(|(x, y, t)| Point::new([vec![x; m], vec![y; m]].concat(), t))
        .collect()
}

pub(crate) fn martin(ctx: &mut Ctx) -> Result<(), CliError> {
    let m = ctx.model.m();
    let (w1, w2) = (vec![0.0; m], vec![1.0 / 3.0; m]);
    let seq = MartinSequence::new(m, MartinFamily::Exponential { w1: w1.clone(), w2: w2.clone() }, 0.0)?;
    let lim = martin_limit_predicted(&w1, &w2)?;
    let ks = [100, 1000, 10_000];
    let (mut at_1000, mut decreasing, mut worst_rate) = (0.0f64, true, f64::NEG_INFINITY);
    for z in martin_points(m) {
        let errs = ks
            .iter()
            .map(|&k| Ok((martin_quotient(&seq, k, &z)? - lim.eval(&z)).abs()))
            .collect::<Result<Vec<f64>, CliError>>()?;
        at_1000 = at_1000.max(errs[1]);
        decreasing &= errs.windows(2).all(|w| w[1] < w[0]);
        worst_rate = worst_rate.max(convergence_rate(&ks, &errs).unwrap_or(f64::NAN));
    }
    let inputs = "family=exponential w1=0 w2=1/3 T=0 k=100,1000,10000 points=5".to_string();
    ctx.at_most("exponential family error at k=1000", inputs.clone(), at_1000, 2e-2);
    ctx.holds("exponential family error decreases", inputs.clone(), decreasing);
    ctx.at_most("exponential family fitted rate", inputs, worst_rate, -0.9);

    let zero = MartinSequence::new(m, MartinFamily::ZeroLimit { w: vec![1.0; m] }, 0.0)?;
    let z = Point::new([vec![0.5; m], vec![0.0; m]].concat(), -0.5);
    ctx.at_most("zero family at k=200", "w=1 T=0 z=(0.5,0,-0.5)".into(), martin_quotient(&zero, 200, &z)?, 1e-8);

    let bounded =
        MartinSequence::new(m, MartinFamily::BoundedTau { xi: vec![1.0; m], eta: vec![-0.5; m], tau_limit: 1.0 }, 2.0)?;
    let mut zeros = true;
    for _ in 0..50 {
        let mut z = ctx.point(2.0);
        z.time = ctx.rng.gen_range(-2.0..0.99);
        let k0 = (1.0 / (1.0 - z.time)).ceil() as usize + 1;
        for k in [k0, 10 * k0, 1000.max(k0)] {
            zeros &= martin_quotient(&bounded, k, &z)? == 0.0;
        }
    }
    ctx.holds("bounded family exact zeros for t < tau", "tau_limit=1 T=2 cases=50".into(), zeros);

    let mut gap = 0.0f64;
    let base = Point::new(vec![0.0; 2 * m], 0.5);
    let seq2 = MartinSequence::new(m, MartinFamily::Exponential { w1: vec![0.2; m], w2: vec![0.25; m] }, 0.5)?;
    for k in 1..=5 {
        let pole = seq2.pole(k);
        for z in martin_points(m) {
            let num = kolmogorov_kernel(m, &z, &pole)?.value();
            let den = kolmogorov_kernel(m, &base, &pole)?.value();
            if num.is_normal() && den.is_normal() {
                gap = gap.max((martin_quotient(&seq2, k, &z)? / (num / den) - 1.0).abs());
            }
        }
    }
    ctx.at_most("log-space vs direct quotient", "w1=0.2 w2=0.25 T=0.5 k=1..5".into(), gap, 1e-10);

    let (mut residual, mut harnack) = (0.0f64, 0.0f64);
    for _ in 0..ctx.cases() {
        let w1: Vec<f64> = (0..m).map(|_| ctx.rng.gen_range(-0.5..0.5)).collect();
        let w2: Vec<f64> = (0..m).map(|_| ctx.rng.gen_range(-0.5..0.5)).collect();
        let lim = martin_limit_predicted(&w1, &w2)?;
        let z = ctx.point(2.0);
        residual = residual.max(pde_residual(ctx.model, |p| lim.eval(p), &z, EXACT_H)?.abs() / lim.eval(&z));
        let tau = ctx.rng.gen_range(0.0..2.0);
        let mut shifted = z.clone();
        for j in 0..m {
            shifted.spatial[m + j] += tau * z.spatial[j];
        }
        shifted.time -= tau;
        let v2: f64 = lim.v.iter().map(|v| v * v).sum();
        harnack = harnack.max((lim.eval(&shifted) / lim.eval(&z) - (-tau * v2).exp()).abs());
    }
    let cases = ctx.cases();
    ctx.at_most("predicted limit pde residual (relative)", format!("cases={cases} h={EXACT_H}"), residual, 1e-6);
    ctx.at_most("invariant harnack shape of limits", format!("cases={cases}"), harnack, 1e-12);
    Ok(())
}

/// Result of stepping one field to a final time.
pub struct SolveRun {
    /// Field at the final time.
    pub field: GridField,
    /// Time step used.
    pub dt: f64,
    /// Number of steps.
    pub steps: usize,
    /// Largest y-independence deviation over all steps (Kolmogorov only).
    pub y_deviation: f64,
    /// Smallest value over all steps.
    pub min_value: f64,
}

/// Steps `u0` to `t_end` one step at a time, tracking per-step diagnostics.
/// `dt` defaults to the CFL bound rounded down to land on `t_end`.
pub fn run_solve(
    model: &OperatorModel,
    u0: GridField,
    t_end: f64,
    dt: Option<f64>,
    boundary: Boundary,
) -> Result<SolveRun, CliError> {
    let span = t_end - u0.time;
    if span.is_nan() || span <= 0.0 {
        return Err(CliError::Config(format!("t_end {t_end} must exceed the initial time {}", u0.time)));
    }
    let (dt, steps) = match dt {
        Some(dt) if dt > 0.0 => (dt, (span / dt).round().max(1.0) as usize),
        Some(dt) => return Err(CliError::Config(format!("dt must be positive, got {dt}"))),
        None => {
            let steps = (span / cfl_bound(model, &u0)?).ceil().max(1.0) as usize;
            (span / steps as f64, steps)
        }
    };
    let track_y = model.kind() == ModelKind::Kolmogorov;
    let opts = SolveOptions { boundary, record_every: None };
    let mut y_deviation = if track_y { y_independence_deviation(&u0, 1)? } else { 0.0 };
    let mut min_value = u0.min_value();
    let mut cur = u0;
    for _ in 0..steps {
        cur = solve_cauchy_with(model, &cur, dt, 1, &opts)?.field;
        if track_y {
            y_deviation = y_deviation.max(y_independence_deviation(&cur, 1)?);
        }
        min_value = min_value.min(cur.min_value());
    }
    Ok(SolveRun { field: cur, dt, steps, y_deviation, min_value })
}

/// `exp(v x_1 + v² t)`, the extremal data of the solver checks.
pub fn extremal_data(v: f64) -> impl Fn(&[f64], f64) -> f64 + Send + Sync + Clone + 'static {
    move |x: &[f64], t: f64| (v * x[0] + v * v * t).exp()
}

/// Worst relative error against `exact` on nodes at least `margin` inside the box.
pub fn interior_error(field: &GridField, margin: f64, exact: impl Fn(&[f64], f64) -> f64) -> f64 {
    field
        .interior(margin)
        .into_iter()
        .map(|i| (field.values[i] / exact(&field.coords(i), field.time) - 1.0).abs())
        .fold(0.0, f64::max)
}

fn square(model: &OperatorModel, points: usize) -> Result<Vec<Axis>, CliError> {
    (0..model.n()).map(|_| Axis::new(-2.0, 2.0, points).map_err(CliError::from)).collect()
}

pub(crate) fn solver(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    if has_scheme(model) {
        let u0 = GridField::from_fn(square(model, 15)?, 0.0, |_| 1.0)?;
        let bound = cfl_bound(model, &u0)?;
        let u = solve_cauchy(model, &u0, bound, 50)?;
        let drift = u.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        ctx.at_most("constant preserved", "points=15 steps=50 dt=cfl".into(), drift, 0.0);
        ctx.holds("cfl violation rejected", "dt=1.01*cfl".into(), solve_cauchy(model, &u0, 1.01 * bound, 1).is_err());

        let mut worst_min = 0.0f64;
        for _ in 0..10 {
            let axes = square(model, 15)?;
            let len = axes.iter().map(|a| a.points).product();
            let values = (0..len).map(|_| ctx.rng.gen_range(0.0..1.0)).collect();
            let u0 = GridField::new(axes, values, 0.0)?;
            let run = run_solve(model, u0, 20.0 * bound, Some(bound), Boundary::Frozen)?;
            worst_min = worst_min.min(run.min_value);
        }
        ctx.at_most(
            "negative values from nonnegative data",
            "cases=10 points=15 steps=20".into(),
            0.0 - worst_min,
            0.0,
        );

        if model.has_extremal_catalog() {
            let exact = extremal_data(0.5);
            let errs = [21, 41, 81]
                .into_iter()
                .map(|n| {
                    let u0 = GridField::from_fn(square(model, n)?, 0.0, |x| exact(x, 0.0))?;
                    let run = run_solve(model, u0, 0.25, None, Boundary::trace(exact.clone()))?;
                    Ok((interior_error(&run.field, 0.5, &exact), run))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let inputs = "v=0.5 box=[-2,2] t=0.25 margin=0.5 boundary=exact".to_string();
            ctx.at_most("extremal data interior error", format!("{inputs} points=81"), errs[2].0, 1e-3);
            let worst = errs.windows(2).map(|w| w[1].0 / w[0].0).fold(0.0, f64::max);
            ctx.at_most("refinement error ratio", format!("{inputs} points=21,41,81"), worst, 1.0 / 3.5);
            if model.kind() == ModelKind::Kolmogorov {
                ctx.at_most(
                    "y-independence over all steps",
                    format!("{inputs} points=81"),
                    errs[2].1.y_deviation,
                    1e-10,
                );
                let field = &errs[2].1.field;
                let back = 0.1;
                let u0 = GridField::from_fn(square(model, 81)?, 0.0, |x| exact(x, 0.0))?;
                let early = run_solve(model, u0, 0.25 - back, Some(errs[2].1.dt), Boundary::trace(exact.clone()))?;
                let lag = field.time - early.field.time;
                let expected = (-0.25 * lag).exp();
                let gap = field
                    .interior(0.5)
                    .into_iter()
                    .map(|i| (early.field.values[i] / field.values[i] - expected).abs())
                    .fold(0.0, f64::max);
                ctx.at_most("discrete separation ratio", format!("{inputs} lag={lag:.6}"), gap, 1e-3);
            }
        }
    }

    if model.has_extremal_catalog() {
        let support = extremal_support(model)?;
        let (mut res, mut stat) = (0.0f64, 0.0f64);
        let mut liouville = true;
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        for i in 0..ctx.cases() {
            let mut alpha = vec![0.0; model.n()];
            if i > 0 {
                for &j in &support {
                    alpha[j] = ctx.rng.gen_range(-1.0..1.0);
                }
            }
            let e = extremal(model, &alpha)?;
            let z = ctx.point(2.0);
            res = res.max(pde_residual(model, |p| e.eval(p), &z, EXACT_H)?.abs() / e.eval(&z));
            let s = stationary_residual(model, |q| e.stationary(q), e.lambda(), &z.spatial, EXACT_H)?;
            stat = stat.max(s.abs() / e.stationary(&z.spatial));
            let samples: Vec<(f64, f64)> =
                times.iter().map(|&t| (t, e.eval(&Point::new(vec![0.0; model.n()], t)))).collect();
            liouville &= if e.norm_sq() == 0.0 {
                [1e-6, 1e-3, 1.0].iter().all(|&eps| liouville_growth_check(&samples, eps).unwrap_or(false))
            } else {
                !liouville_growth_check(&samples, e.norm_sq() / 2.0)?
            };
        }
        let cases = ctx.cases();
        ctx.at_most("extremal pde residual (relative)", format!("cases={cases} h={EXACT_H}"), res, 1e-6);
        ctx.at_most("extremal stationary residual (relative)", format!("cases={cases} h={EXACT_H}"), stat, 1e-6);
        ctx.holds("growth check passes only for constants", format!("cases={cases} t=0..9.5"), liouville);

        let atoms: Vec<(f64, Vec<f64>)> = (0..3)
            .map(|_| (ctx.rng.gen_range(0.1..1.0), support.iter().map(|_| ctx.rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let lambda = -ctx.rng.gen_range(0.1..1.0);
        let mix = StationaryMixture::new(model, lambda, atoms)?;
        let mut worst = 0.0f64;
        for _ in 0..cases {
            let x = ctx.point(2.0).spatial;
            worst = worst.max(stationary_residual(model, |q| mix.eval(q), lambda, &x, EXACT_H)?.abs() / mix.eval(&x));
        }
        ctx.at_most(
            "mixture stationary residual (relative)",
            format!("atoms=3 lambda={lambda:.6} cases={cases}"),
            worst,
            1e-6,
        );
        let bound = extremal(model, &vec![0.0; model.n()])?.principal_eigenvalue_bound();
        ctx.at_most("principal eigenvalue bound", "catalog".into(), bound.abs(), 0.0);
    }
    Ok(())
}

pub(crate) fn separation(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let cases = ctx.cases();
    if model.has_extremal_catalog() {
        let support = extremal_support(model)?;
        let (mut dev, mut gap) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let mut alpha = vec![0.0; model.n()];
            for &j in &support {
                alpha[j] = ctx.rng.gen_range(-1.0..1.0);
            }
            let e = extremal(model, &alpha)?;
            let s = ctx.rng.gen_range(0.1..1.5);
            let pts: Vec<Point> = (0..cases).map(|_| ctx.point(2.0)).collect();
            let st = separation_ratio(model, |z| e.eval(z), &vec![0.0; model.m()], s, &pts)?;
            dev = dev.max(st.max_deviation);
            gap = gap.max((st.mean - (-s * e.norm_sq()).exp()).abs());
        }
        let inputs = format!("extremals=10 points={cases} omega=0");
        ctx.at_most("separation ratio spread", inputs.clone(), dev, 1e-12);
        ctx.at_most("separation ratio vs exp(-s|v|^2)", inputs, gap, 1e-12);
    }
    if model.kind() == ModelKind::OrnsteinUhlenbeck {
        let mut worst = 0.0f64;
        for _ in 0..cases {
            let lambda = ctx.rng.gen_range(-1.0..1.0);
            let z = Point::new(vec![ctx.rng.gen_range(-2.0..2.0)], ctx.rng.gen_range(-1.0..0.3));
            let u = |p: &Point| ou_minimal(lambda, p.spatial[0], p.time);
            worst = worst.max(pde_residual(model, u, &z, EXACT_H)?.abs() / u(&z));
        }
        ctx.at_most("minimal solution pde residual (relative)", format!("cases={cases} h={EXACT_H}"), worst, 1e-6);
    }
    Ok(())
}
