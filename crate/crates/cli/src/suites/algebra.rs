use hypoelliptic::fields::{hormander_rank, left_invariance_residual, TestFunction};
use hypoelliptic::flows::bch_loop_residual;
use hypoelliptic::groups::{automorphism_residual, GROUP_TOLERANCE};
use hypoelliptic::{ModelKind, Point, VectorField};
use rand::Rng;

use super::{scale, Ctx};
use crate::CliError;

/// Coordinates of the random tuples.
const GROUP_RADIUS: f64 = 10.0;

pub(crate) fn groups(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let law = model.law();
    let e = law.identity();
    let cases = ctx.config.verify.group_cases;
    let (mut assoc, mut ident, mut inv, mut auto, mut comp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let (a, b, c) = (ctx.point(GROUP_RADIUS), ctx.point(GROUP_RADIUS), ctx.point(GROUP_RADIUS));
        let ab = law.compose(&a, &b)?;
        let bc = law.compose(&b, &c)?;
        let abc = law.compose(&ab, &c)?;
        let mag = scale(&[&a, &b, &c, &ab, &bc, &abc]);
        assoc = assoc.max(law.associativity_residual(&a, &b, &c)? / mag);
        ident = ident.max(law.compose(&e, &a)?.sup_distance(&a) / scale(&[&a]));
        ident = ident.max(law.compose(&a, &e)?.sup_distance(&a) / scale(&[&a]));
        let ai = law.inverse(&a)?;
        let mag = scale(&[&a, &ai]);
        inv = inv.max(law.compose(&a, &ai)?.sup_distance(&e) / mag);
        inv = inv.max(law.compose(&ai, &a)?.sup_distance(&e) / mag);
        if let Some(dil) = model.dilation() {
            let r = ctx.rng.gen_range(0.1..4.0);
            let s = ctx.rng.gen_range(0.1..4.0);
            let mag = scale(&[&dil.apply(r, &a)?, &dil.apply(r, &b)?, &dil.apply(r, &ab)?]);
            auto = auto.max(automorphism_residual(&law, dil, r, &a, &b)? / mag);
            let once = dil.apply(r * s, &a)?;
            comp = comp.max(dil.apply(r, &dil.apply(s, &a)?)?.sup_distance(&once) / scale(&[&once]));
        }
    }
    let inputs = format!("cases={cases} radius={GROUP_RADIUS} relative=max(1,|terms|)");
    ctx.at_most("associativity", inputs.clone(), assoc, GROUP_TOLERANCE);
    ctx.at_most("identity", inputs.clone(), ident, GROUP_TOLERANCE);
    ctx.at_most("inverse", inputs.clone(), inv, GROUP_TOLERANCE);
    if model.dilation().is_some() {
        ctx.at_most("dilation automorphism", inputs.clone(), auto, GROUP_TOLERANCE);
        ctx.at_most("dilation composition", inputs.clone(), comp, GROUP_TOLERANCE);
    }
    if let Some(layers) = model.layers() {
        let mut worst = 0.0f64;
        for _ in 0..cases {
            let (a, b) = (ctx.point(GROUP_RADIUS), ctx.point(GROUP_RADIUS));
            let c = law.compose(&a, &b)?;
            for &i in layers.first() {
                worst = worst.max((c.spatial[i] - a.spatial[i] - b.spatial[i]).abs() / scale(&[&a, &b, &c]));
            }
        }
        ctx.at_most("first layer additive", inputs, worst, GROUP_TOLERANCE);
        ctx.holds(
            "layer sizes",
            format!("sizes={:?}", layers.sizes()),
            layers.sizes().iter().sum::<usize>() == model.n(),
        );
    }
    Ok(())
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn fields(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let full = model.n() + 1;
    let cases = ctx.cases();
    let fields: Vec<VectorField> =
        (0..model.m()).map(|j| model.generator_spacetime(j)).chain([model.drift()]).collect();
    let k = fields.len();

    if let Some(order) = model.hormander_order() {
        let mut deficient = 0;
        for _ in 0..cases {
            let z = ctx.point(3.0);
            if hormander_rank(model, &z, order) < full {
                deficient += 1;
            }
        }
        ctx.at_most("hormander rank deficient points", format!("cases={cases} order={order}"), deficient as f64, 0.0);
        if order > 1 {
            let mut probe = ctx.point(3.0);
            if model.kind() == ModelKind::Grushin {
                probe.spatial[0] = 0.0;
            }
            let below = hormander_rank(model, &probe, order - 1);
            ctx.holds("hormander order is minimal", format!("order={} probe={probe:?}", order - 1), below < full);
        }
    }

    let mut jacobi = 0.0f64;
    let mut antisym = true;
    for i in 0..cases {
        let (x, y, w) = (&fields[i % k], &fields[(i / k) % k], &fields[(i / (k * k)) % k]);
        let p = ctx.point(3.0).to_vec();
        let terms = [x.bracket(&y.bracket(w)?)?, y.bracket(&w.bracket(x)?)?, w.bracket(&x.bracket(y)?)?];
        let total = terms.iter().fold(vec![0.0; p.len()], |acc, t| add(&acc, &t.eval(&p)));
        jacobi = jacobi.max(sup(&total));
        antisym &= add(&x.bracket(y)?.eval(&p), &y.bracket(x)?.eval(&p)).iter().all(|v| *v == 0.0);
    }
    ctx.at_most("jacobi identity", format!("cases={cases}"), jacobi, 1e-8);
    ctx.holds("bracket antisymmetry exact", format!("cases={cases}"), antisym);

    if model.is_left_invariant() {
        let mut worst = 0.0f64;
        let family = TestFunction::family(model.n());
        for _ in 0..cases {
            let (zeta, z) = (ctx.point(2.0), ctx.point(2.0));
            let moved = model.law().compose(&zeta, &z)?;
            for f in &family {
                let mag = 1.0 + f.eval(&moved).abs();
                for j in 0..=model.m() {
                    let r = left_invariance_residual(model, j, &zeta, &z, |p| f.eval(p))?;
                    worst = worst.max(r / mag);
                }
            }
        }
        ctx.at_most("left invariance", format!("cases={cases} fields=generators+drift"), worst, 1e-5);
    }

    match model.kind() {
        ModelKind::HeisenbergHeat => {
            let b = model.generator(0).bracket(model.generator(1))?;
            let mut err = 0.0f64;
            for _ in 0..cases {
                let p = ctx.point(5.0).spatial;
                err = err.max(sup(&add(&b.eval(&p), &[0.0, 0.0, -1.0])));
            }
            ctx.at_most("[X1,X2] = d/dz", format!("cases={cases} analytic={}", b.has_analytic_jacobian()), err, 1e-12);
        }
        ModelKind::Kolmogorov => {
            let m = model.m();
            let b = model.generator(0).bracket(model.drift_x0())?;
            let mut unit = vec![0.0; 2 * m];
            unit[m] = -1.0;
            let mut err = 0.0f64;
            for _ in 0..cases {
                let p = ctx.point(5.0).spatial;
                err = err.max(sup(&add(&b.eval(&p), &unit)));
            }
            ctx.at_most(
                "[d/dx, x d/dy] = d/dy",
                format!("cases={cases} analytic={}", b.has_analytic_jacobian()),
                err,
                1e-12,
            );
        }
        _ => {}
    }

    // the commutator loop residual must shrink linearly with the loop size
    let z0 = ctx.point(1.0);
    let mut worst_ratio = 0.0f64;
    for a in 0..k {
        for b in a + 1..k {
            let r1 = bch_loop_residual(model, a, b, 2e-2, &z0)?;
            let r2 = bch_loop_residual(model, a, b, 1e-2, &z0)?;
            if r1 > 1e-9 {
                worst_ratio = worst_ratio.max(r2 / r1);
            }
        }
    }
    ctx.at_most(
        "bch loop residual halving ratio",
        format!("s=0.02,0.01 z0={:?}", Point::to_vec(&z0)),
        worst_ratio,
        0.6,
    );
    Ok(())
}
