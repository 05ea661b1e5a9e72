use std::f64::consts::PI;

use hypoelliptic::flows::{
    exp_map, exp_with, harnack_chain, heisenberg_loop, integrate_admissible, mumford_loop, right_translation_residual,
    ControlSchedule, Integrator,
};
use hypoelliptic::reach::{interior_coverage, membership, sample_attainable, SamplerConfig, Verdict};
use hypoelliptic::{ModelKind, OperatorModel, Point};
use rand::Rng;

use super::{scale, Ctx};
use crate::CliError;

pub(crate) fn flows(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let cases = ctx.cases();
    let (mut closed, mut semi, mut right, mut chain) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut time_exact = true;
    for i in 0..cases {
        let z = ctx.point(2.0);
        let w = ctx.control(2.0);
        let s = ctx.rng.gen_range(0.0..2.0);
        let a = exp_map(model, &w, s, &z)?;
        let b = exp_with(model, &w, s, &z, Integrator::Rk4)?;
        closed = closed.max(a.sup_distance(&b) / scale(&[&a]));

        let (s1, s2) = (ctx.rng.gen_range(0.0..1.0), ctx.rng.gen_range(0.0..1.0));
        let integ = if i % 4 == 0 { Integrator::Rk4 } else { Integrator::ClosedForm };
        let once = exp_with(model, &w, s1 + s2, &z, integ)?;
        let twice = exp_with(model, &w, s2, &exp_with(model, &w, s1, &z, integ)?, integ)?;
        semi = semi.max(once.sup_distance(&twice) / scale(&[&once]));

        if model.is_left_invariant() {
            right = right.max(right_translation_residual(model, &w, s, &z)?);
        }

        let links = harnack_chain(model, &w, 0.3, 4, &z)?;
        for (j, p) in links.iter().enumerate() {
            let direct = exp_map(model, &w, 0.3 * j as f64, &z)?;
            chain = chain.max(p.sup_distance(&direct) / scale(&[&direct]));
        }

        let sched = ControlSchedule::new(vec![(s1, w.clone()), (s2, ctx.control(2.0))])?;
        let path = integrate_admissible(model, &sched, &z, 1e-2)?;
        time_exact &= (path.endpoint().time - (z.time - s1 - s2)).abs() <= 1e-12;
    }
    let inputs = format!("cases={cases} s<2 |omega|<2 relative=max(1,|z|)");
    ctx.at_most("closed form vs rk4", inputs.clone(), closed, 1e-8);
    ctx.at_most("semigroup", inputs.clone(), semi, 1e-8);
    if model.is_left_invariant() {
        ctx.at_most("right translation", inputs.clone(), right, 1e-8);
    }
    ctx.at_most("harnack chain", inputs.clone(), chain, 1e-8);
    ctx.holds("time decreases at unit rate", inputs, time_exact);
    Ok(())
}

pub(crate) fn loops(ctx: &mut Ctx) -> Result<(), CliError> {
    match ctx.model.kind() {
        ModelKind::HeisenbergHeat => {
            let exact = heisenberg_loop(1.0, 1.0, &Point::origin(3), Integrator::ClosedForm)?;
            let err = exact.sup_distance(&Point::new(vec![0.0, 0.0, 1.0], -4.0));
            ctx.at_most("loop c=1 s=1 from origin", "c=1 s=1 z0=0".into(), err, 1e-10);
            let mut worst = [0.0f64; 2];
            for _ in 0..50 {
                let c = ctx.rng.gen_range(-2.0..2.0);
                let s = ctx.rng.gen_range(0.05..1.5);
                let z0 = ctx.point(3.0);
                let [x, y, z] = [z0.spatial[0], z0.spatial[1], z0.spatial[2]];
                let want = Point::new(vec![x, y, z + c * c * s * s], z0.time - 4.0 * s);
                for (k, integ) in [Integrator::ClosedForm, Integrator::Rk4].into_iter().enumerate() {
                    worst[k] = worst[k].max(heisenberg_loop(c, s, &z0, integ)?.sup_distance(&want));
                }
            }
            ctx.at_most("loop closed form", "cases=50".into(), worst[0], 1e-8);
            ctx.at_most("loop rk4", "cases=50".into(), worst[1], 1e-8);
        }
        ModelKind::Mumford => {
            let mut worst = [0.0f64; 4];
            for _ in 0..50 {
                let s = ctx.rng.gen_range(0.2..3.0);
                let z0 = ctx.point(3.0);
                let mut fwd = z0.clone();
                fwd.spatial[0] += 2.0 * PI;
                fwd.time -= s;
                let mut back = z0.clone();
                back.time -= 2.0 * s;
                for (k, integ) in [Integrator::ClosedForm, Integrator::Rk4].into_iter().enumerate() {
                    let l = mumford_loop(s, &z0, integ)?;
                    worst[2 * k] = worst[2 * k].max(l.forward.sup_distance(&fwd));
                    worst[2 * k + 1] = worst[2 * k + 1].max(l.round_trip.sup_distance(&back));
                }
            }
            ctx.at_most("forward leg closed form", "cases=50".into(), worst[0], 1e-8);
            ctx.at_most("round trip closed form", "cases=50".into(), worst[1], 1e-8);
            ctx.at_most("forward leg rk4", "cases=50".into(), worst[2], 1e-8);
            ctx.at_most("round trip rk4", "cases=50".into(), worst[3], 1e-8);
        }
        _ => {}
    }
    Ok(())
}

/// Seeded interior probes of the Mumford cone with slack at least 0.2.
fn mumford_probes(ctx: &mut Ctx, count: usize) -> Vec<Point> {
    let mum = OperatorModel::mumford();
    let z0 = Point::origin(3);
    let mut probes = Vec::with_capacity(count);
    while probes.len() < count {
        let t = ctx.rng.gen_range(-0.7..-0.3);
        let p = Point::new(
            vec![ctx.rng.gen_range(-1.5..1.5), ctx.rng.gen_range(-0.5..0.5), ctx.rng.gen_range(-0.5..0.5)],
            t,
        );
        if membership(&mum, &z0, &p).margin >= 0.2 {
            probes.push(p);
        }
    }
    probes
}

pub(crate) fn reach(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let rc = &ctx.config.reach;
    let sampler = SamplerConfig {
        n_paths: ctx.config.verify.reach_paths,
        segments: rc.segments,
        omega_bound: rc.omega_bound,
        horizon: rc.horizon,
        seed: ctx.config.seed,
    };
    let slack = rc.slack;
    let z0 = Point::origin(model.n());
    let cloud = sample_attainable(model, &z0, &sampler)?;
    let outside = cloud.endpoints.iter().filter(|e| !membership(model, &z0, e).within(slack)).count();
    let frac = if cloud.endpoints.is_empty() { 0.0 } else { outside as f64 / cloud.endpoints.len() as f64 };
    let inputs = format!("{sampler:?} slack={slack}");
    ctx.at_most("endpoints outside attainable set", inputs.clone(), frac, 0.0);
    ctx.at_most("dropped paths", inputs.clone(), cloud.dropped as f64, 0.0);
    match model.kind() {
        ModelKind::Cmp => {
            let mut worst = 0.0f64;
            let mut boundary = true;
            for _ in 0..20 {
                let z0 = ctx.point(2.0);
                let s = ctx.rng.gen_range(0.1..2.0);
                let v = membership(model, &z0, &exp_map(model, &[0.0], s, &z0)?);
                boundary &= v.verdict == Verdict::Boundary;
                worst = worst.max(v.margin.abs());
            }
            ctx.holds("drift point classified boundary", "cases=20".into(), boundary);
            ctx.at_most("drift point margin", "cases=20".into(), worst, 1e-9);
        }
        ModelKind::Mumford => {
            let probes = mumford_probes(ctx, 20);
            let cov = interior_coverage(model, &z0, &cloud, &probes, 0.15)?;
            ctx.at_most("uncovered interior probes", format!("{inputs} probes=20 eps=0.15"), 1.0 - cov, 0.1);
        }
        _ => {}
    }
    Ok(())
}
