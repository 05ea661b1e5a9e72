//! Subcommand bodies. Each returns a report plus any data tables to write.

use std::path::{Path, PathBuf};
use std::thread;

use hypoelliptic::flows::{exp_with, integrate_admissible, ControlSchedule, Integrator};
use hypoelliptic::kernels::{
    convergence_rate, heat_kernel, kolmogorov_kernel, kolmogorov_mass, martin_limit_predicted, martin_quotient,
    pde_residual, KernelValue, MartinFamily, MartinSequence,
};
use hypoelliptic::reach::{membership, sample_attainable, SamplerConfig};
use hypoelliptic::solver::{Axis, Boundary, GridField};
use hypoelliptic::{ModelKind, OperatorModel, Point};
use serde::Serialize;

use crate::config::{Config, Format};
use crate::output::Table;
use crate::report::{sci, Check, Report};
use crate::suites::{self, Suite};
use crate::CliError;

/// A report and the tables that accompany it.
pub struct Outcome {
    /// Checks and summary.
    pub report: Report,
    /// `(destination, bytes)` pairs.
    pub tables: Vec<(PathBuf, Vec<u8>)>,
}

type KernelFn = dyn Fn(&Point) -> hypoelliptic::Result<KernelValue>;

fn echo(config: &Config) -> serde_json::Value {
    serde_json::to_value(config).expect("config serialises")
}

/// The explicit table path, or one derived from `--out` as `<stem>.<kind>.csv`.
fn table_path(explicit: &Option<PathBuf>, config: &Config, kind: &str) -> Option<PathBuf> {
    explicit.clone().or_else(|| {
        let out = config.out.as_ref()?;
        let stem = out.file_stem()?.to_string_lossy().into_owned();
        Some(out.with_file_name(format!("{stem}.{kind}.csv")))
    })
}

fn single_model(config: &mut Config, fallback: Option<&str>, command: &str) -> Result<OperatorModel, CliError> {
    if config.model == "all" {
        match fallback {
            Some(name) => config.model = name.to_string(),
            None => return Err(CliError::Config(format!("`{command}` needs a single --model"))),
        }
    }
    let model = OperatorModel::by_name(&config.model)?;
    config.model = model.name().to_string();
    Ok(model)
}

fn point_from(coords: &[f64], n: usize, what: &str) -> Result<Point, CliError> {
    if coords.is_empty() {
        return Ok(Point::origin(n));
    }
    if coords.len() != n + 1 {
        return Err(CliError::Config(format!("{what} needs {} coordinates (x, t), got {}", n + 1, coords.len())));
    }
    Ok(Point::new(coords[..n].to_vec(), coords[n]))
}

fn coords_cells(p: &Point) -> Vec<String> {
    p.spatial.iter().chain([&p.time]).map(|v| sci(*v)).collect()
}

fn coord_header(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).chain(["t".to_string()]).collect()
}

#[derive(Serialize)]
struct ModelRow {
    name: String,
    kind: &'static str,
    n: usize,
    m: usize,
    hormander_order: Option<usize>,
    left_invariant: bool,
    closed_form_exp: bool,
    attainable_oracle: bool,
    kernel: bool,
    extremal_catalog: bool,
}

/// Catalog listing in the requested format.
pub fn models(format: Format) -> String {
    let rows: Vec<ModelRow> = OperatorModel::catalog()
        .iter()
        .map(|m| ModelRow {
            name: m.name().to_string(),
            kind: m.kind().name(),
            n: m.n(),
            m: m.m(),
            hormander_order: m.hormander_order(),
            left_invariant: m.is_left_invariant(),
            closed_form_exp: m.has_closed_form_exp(),
            attainable_oracle: m.has_attainable_oracle(),
            kernel: m.has_kernel(),
            extremal_catalog: m.has_extremal_catalog(),
        })
        .collect();
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialise");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
    }
}

/// Runs the selected suites on the selected models, one thread per job.
pub fn verify(mut config: Config) -> Result<Outcome, CliError> {
    let models = if config.model == "all" {
        OperatorModel::catalog()
    } else {
        let m = OperatorModel::by_name(&config.model)?;
        config.model = m.name().to_string();
        vec![m]
    };
    let requested = config.suites.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>, _>>()?;
    let selected: Vec<Suite> = if requested.is_empty() { Suite::ALL.to_vec() } else { requested.clone() };
    let mut jobs = Vec::new();
    for model in &models {
        for &suite in &selected {
            if suite.applies(model) {
                jobs.push((model, suite));
            } else if models.len() == 1 && !requested.is_empty() {
                return Err(CliError::Config(format!("suite `{suite}` does not apply to `{}`", model.name())));
            }
        }
    }
    let config_ref = &config;
    let results: Vec<Vec<Check>> = thread::scope(|scope| {
        let handles: Vec<_> =
            jobs.iter().map(|&(model, suite)| scope.spawn(move || suite.run(model, config_ref))).collect();
        handles
            .into_iter()
            .zip(&jobs)
            .map(|(h, (model, suite))| match h.join() {
                Ok(Ok(checks)) => checks,
                Ok(Err(e)) => {
                    vec![Check::at_most(format!("{}/{suite} error", model.name()), e.to_string(), f64::NAN, 0.0)]
                }
                Err(_) => {
                    vec![Check::at_most(format!("{}/{suite} panicked", model.name()), String::new(), f64::NAN, 0.0)]
                }
            })
            .collect()
    });
    let names: Vec<&str> = selected.iter().map(|s| s.name()).collect();
    let report = Report::new(format!("verify:{}", names.join("+")), echo(&config), results.concat());
    Ok(Outcome { report, tables: Vec::new() })
}

/// One constant-control exponential, closed form against RK4, with its path.
pub fn flow(mut config: Config) -> Result<Outcome, CliError> {
    let model = single_model(&mut config, None, "flow")?;
    let fc = config.flow.clone();
    let omega = if fc.omega.is_empty() { vec![0.0; model.m()] } else { fc.omega.clone() };
    let z0 = point_from(&fc.z0, model.n(), "flow.z0")?;
    if fc.samples == 0 {
        return Err(CliError::Config("flow.samples must be ≥ 1".into()));
    }
    let rk4 = exp_with(&model, &omega, fc.s, &z0, Integrator::Rk4)?;
    let mut checks = Vec::new();
    let inputs = format!("model={} omega={omega:?} s={} z0={:?}", model.name(), fc.s, z0.to_vec());
    if let Some(closed) = model.exp_closed_form(&omega, fc.s, &z0) {
        let rel = closed.sup_distance(&rk4) / closed.sup_norm().max(1.0);
        checks.push(Check::at_most(format!("{}/closed form vs rk4", model.name()), inputs.clone(), rel, 1e-8));
    }
    checks.push(Check::at_most(
        format!("{}/endpoint time", model.name()),
        inputs,
        (rk4.time - (z0.time - fc.s)).abs(),
        1e-12,
    ));

    let mut tables = Vec::new();
    if let Some(path) = table_path(&fc.table, &config, "path") {
        let mut t = Table::new(&[vec!["s".to_string()], coord_header(model.n())].concat());
        if fc.s > 0.0 {
            let sched = ControlSchedule::constant(omega, fc.s)?;
            let p = integrate_admissible(&model, &sched, &z0, fc.s / fc.samples as f64)?;
            for (s, z) in &p.samples {
                t.row(&[vec![sci(*s)], coords_cells(z)].concat());
            }
        } else {
            t.row(&[vec![sci(0.0)], coords_cells(&z0)].concat());
        }
        tables.push((path, t.into_bytes()));
    }
    Ok(Outcome { report: Report::new("flow", echo(&config), checks), tables })
}

/// Samples the attainable set and classifies every endpoint.
pub fn reach(mut config: Config) -> Result<Outcome, CliError> {
    let model = single_model(&mut config, None, "reach")?;
    if !model.has_attainable_oracle() {
        return Err(CliError::Config(format!("`{}` has no attainable-set oracle", model.name())));
    }
    let rc = config.reach.clone();
    let z0 = point_from(&rc.z0, model.n(), "reach.z0")?;
    let sampler = SamplerConfig {
        n_paths: rc.paths,
        segments: rc.segments,
        omega_bound: rc.omega_bound,
        horizon: rc.horizon,
        seed: config.seed,
    };
    let cloud = sample_attainable(&model, &z0, &sampler)?;
    let verdicts: Vec<_> = cloud.endpoints.iter().map(|e| membership(&model, &z0, e)).collect();
    let inputs = format!("model={} z0={:?} {sampler:?} slack={}", model.name(), z0.to_vec(), rc.slack);
    let mut checks = Vec::new();
    if cloud.endpoints.is_empty() {
        checks.push(Check::holds(format!("{}/empty cloud (trivially sound)", model.name()), inputs, true));
    } else {
        let outside = verdicts.iter().filter(|v| !v.within(rc.slack)).count();
        let frac = outside as f64 / verdicts.len() as f64;
        checks.push(Check::at_most(
            format!("{}/endpoints outside attainable set", model.name()),
            inputs.clone(),
            frac,
            0.0,
        ));
        checks.push(Check::at_most(format!("{}/dropped paths", model.name()), inputs, cloud.dropped as f64, 0.0));
    }
    let mut tables = Vec::new();
    if let Some(path) = table_path(&rc.cloud, &config, "cloud") {
        let header =
            [vec!["path".to_string()], coord_header(model.n()), vec!["verdict".into(), "margin".into()]].concat();
        let mut t = Table::new(&header);
        for ((id, e), v) in cloud.ids.iter().zip(&cloud.endpoints).zip(&verdicts) {
            t.row(
                &[vec![id.to_string()], coords_cells(e), vec![v.verdict.as_str().to_string(), sci(v.margin)]].concat(),
            );
        }
        tables.push((path, t.into_bytes()));
    }
    Ok(Outcome { report: Report::new("reach", echo(&config), checks), tables })
}

/// Convergence table of Martin quotients against their predicted limit.
pub fn martin(mut config: Config) -> Result<Outcome, CliError> {
    let model = single_model(&mut config, Some("kolmogorov"), "martin")?;
    if model.kind() != ModelKind::Kolmogorov {
        return Err(CliError::Config(format!("Martin quotients need a kolmogorov model, not `{}`", model.name())));
    }
    let mc = config.martin.clone();
    let m = model.m();
    if mc.ks.is_empty() || mc.ks.contains(&0) {
        return Err(CliError::Config("martin.ks must be a nonempty list of positive integers".into()));
    }
    let family = match mc.family.as_str() {
        "exponential" => MartinFamily::Exponential { w1: mc.w1.clone(), w2: mc.w2.clone() },
        "zero" => MartinFamily::ZeroLimit { w: mc.w1.clone() },
        "bounded" => MartinFamily::BoundedTau { xi: mc.w1.clone(), eta: mc.w2.clone(), tau_limit: mc.tau_limit },
        other => return Err(CliError::Config(format!("unknown Martin family `{other}`"))),
    };
    let seq = MartinSequence::new(m, family, mc.base_time)?;
    let limit = match mc.family.as_str() {
        "exponential" => Some(martin_limit_predicted(&mc.w1, &mc.w2)?),
        _ => None,
    };
    let predicted = |z: &Point| match (&limit, mc.family.as_str()) {
        (Some(l), _) => l.eval(z) / l.eval(&Point::new(vec![0.0; 2 * m], mc.base_time)),
        (None, "zero") => 0.0,
        (None, _) if z.time < mc.tau_limit => 0.0,
        _ => f64::NAN,
    };
    let points = mc.points.iter().map(|p| point_from(p, 2 * m, "martin.points")).collect::<Result<Vec<Point>, _>>()?;

    let mut header = vec!["k".to_string(), "point".to_string()];
    header.extend(coord_header(2 * m));
    header.extend(["u_k", "predicted", "error"].map(String::from));
    let mut table = Table::new(&header);
    let mut checks = Vec::new();
    let inputs = format!("family={} w1={:?} w2={:?} T={} ks={:?}", mc.family, mc.w1, mc.w2, mc.base_time, mc.ks);
    for (i, z) in points.iter().enumerate() {
        let want = predicted(z);
        let mut errs = Vec::with_capacity(mc.ks.len());
        for &k in &mc.ks {
            let u = martin_quotient(&seq, k, z)?;
            let err = (u - want).abs();
            table.row(
                &[vec![k.to_string(), i.to_string()], coords_cells(z), vec![sci(u), sci(want), sci(err)]].concat(),
            );
            errs.push(err);
        }
        if want.is_nan() {
            continue;
        }
        let name = |what: &str| format!("{}/point {i} {what}", model.name());
        let pin = format!("{inputs} z={:?}", z.to_vec());
        let decreasing = errs.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0);
        checks.push(Check::holds(name("error decreases"), pin.clone(), decreasing));
        checks.push(Check::at_most(name("final error"), pin.clone(), *errs.last().expect("nonempty"), mc.bound));
        if let Some(rate) = convergence_rate(&mc.ks, &errs) {
            checks.push(Check::at_most(name("fitted rate"), pin, rate, 0.0));
        }
    }
    let tables = table_path(&mc.table, &config, "martin").map(|p| (p, table.into_bytes())).into_iter().collect();
    Ok(Outcome { report: Report::new("martin", echo(&config), checks), tables })
}

/// Finite-difference Cauchy problem on a box.
pub fn solve(mut config: Config) -> Result<Outcome, CliError> {
    let model = single_model(&mut config, Some("kolmogorov"), "solve")?;
    let sc = config.solve.clone();
    let axes = (0..model.n()).map(|_| Axis::new(sc.min, sc.max, sc.points)).collect::<Result<Vec<_>, _>>()?;
    let exact = suites::extremal_data(sc.v);
    let (u0, extremal_data) = match sc.initial.as_str() {
        "extremal" if model.has_extremal_catalog() => (GridField::from_fn(axes, 0.0, |x| exact(x, 0.0))?, true),
        "extremal" => return Err(CliError::Config(format!("`{}` has no extremal catalog", model.name()))),
        "constant" => (GridField::from_fn(axes, 0.0, |_| sc.value)?, false),
        other => return Err(CliError::Config(format!("unknown initial data `{other}`"))),
    };
    let boundary = match sc.boundary.as_str() {
        "exact" if extremal_data => Boundary::trace(exact.clone()),
        "exact" => return Err(CliError::Config("an exact boundary trace needs extremal initial data".into())),
        "frozen" => Boundary::Frozen,
        other => return Err(CliError::Config(format!("unknown boundary `{other}`"))),
    };
    let nonneg = u0.min_value() >= 0.0;
    let run = suites::run_solve(&model, u0, sc.t_end, sc.dt, boundary)?;
    let inputs = format!(
        "model={} box=[{},{}] points={} initial={} v={} t_end={} dt={:.16e} steps={} boundary={}",
        model.name(),
        sc.min,
        sc.max,
        sc.points,
        sc.initial,
        sc.v,
        sc.t_end,
        run.dt,
        run.steps,
        sc.boundary
    );
    let name = |what: &str| format!("{}/{what}", model.name());
    let mut checks = Vec::new();
    if extremal_data {
        let err = suites::interior_error(&run.field, sc.margin, &exact);
        checks.push(Check::at_most(
            name("interior relative error"),
            format!("{inputs} margin={}", sc.margin),
            err,
            sc.tolerance,
        ));
    } else {
        let drift = run.field.values.iter().map(|v| (v - sc.value).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most(name("constant preserved"), inputs.clone(), drift, 0.0));
    }
    if model.kind() == ModelKind::Kolmogorov {
        checks.push(Check::at_most(name("y-independence over all steps"), inputs.clone(), run.y_deviation, 1e-10));
    }
    if nonneg {
        checks.push(Check::at_most(name("negative values"), inputs, (-run.min_value).max(0.0), 0.0));
    }

    let mut tables = Vec::new();
    if let Some(path) = table_path(&sc.field, &config, "field") {
        let f = &run.field;
        let mut t = Table::new(&[coord_header(model.n())[..model.n()].to_vec(), vec!["u".to_string()]].concat());
        for (i, a) in f.axes.iter().enumerate() {
            t.comment(&format!("axis {i}: min={} max={} points={}", sci(a.min), sci(a.max), a.points));
        }
        t.comment(&format!("time={}", sci(f.time)));
        for i in 0..f.len() {
            let mut row: Vec<String> = f.coords(i).iter().map(|v| sci(*v)).collect();
            row.push(sci(f.values[i]));
            t.row(&row);
        }
        tables.push((path, t.into_bytes()));
    }
    Ok(Outcome { report: Report::new("solve", echo(&config), checks), tables })
}

/// Kernel values and residuals at configured points.
pub fn kernel(mut config: Config) -> Result<Outcome, CliError> {
    let model = single_model(&mut config, Some("kolmogorov"), "kernel")?;
    let kc = config.kernel.clone();
    let n = model.n();
    let zeta = point_from(&kc.zeta, n, "kernel.zeta")?;
    let eval: Box<KernelFn> = match model.kind() {
        ModelKind::Kolmogorov => {
            let (m, zeta) = (model.m(), zeta.clone());
            Box::new(move |z| kolmogorov_kernel(m, z, &zeta))
        }
        ModelKind::Heat => {
            let zeta = zeta.clone();
            Box::new(move |z| heat_kernel(n, z, &zeta))
        }
        _ => return Err(CliError::Config(format!("`{}` has no fundamental solution", model.name()))),
    };
    let value = |z: &Point| eval(z).map(|k| k.value()).unwrap_or(f64::NAN);
    let mut header = vec!["point".to_string()];
    header.extend(coord_header(n));
    header.extend(["log_value", "value", "residual", "relative"].map(String::from));
    let mut table = Table::new(&header);
    let mut checks = Vec::new();
    for (i, raw) in kc.points.iter().enumerate() {
        let z = point_from(raw, n, "kernel.points")?;
        let k = eval(&z)?;
        let inputs = format!("model={} zeta={:?} z={:?} h={}", model.name(), zeta.to_vec(), z.to_vec(), kc.h);
        let (res, rel) = if z.time > zeta.time {
            let r = pde_residual(&model, value, &z, kc.h)?;
            (r, r.abs() / k.value())
        } else {
            (0.0, 0.0)
        };
        if z.time > zeta.time {
            checks.push(Check::at_most(
                format!("{}/point {i} relative residual", model.name()),
                inputs,
                rel,
                kc.tolerance,
            ));
        } else {
            checks.push(Check::holds(format!("{}/point {i} zero before the pole", model.name()), inputs, k.is_zero()));
        }
        table.row(
            &[vec![i.to_string()], coords_cells(&z), vec![sci(k.log_value), sci(k.value()), sci(res), sci(rel)]]
                .concat(),
        );
    }
    match model.kind() {
        ModelKind::Kolmogorov if model.m() == 1 => {
            let mass = kolmogorov_mass(1.0, 1e-9)?;
            let rel = (mass / (2.0 * std::f64::consts::PI).sqrt() - 1.0).abs();
            checks.push(Check::at_most("kolmogorov/mass / sqrt(2 pi) - 1", "t=1 tol=1e-9", rel, 0.01));
        }
        ModelKind::Heat if n <= 2 => {
            let mass = suites::heat_mass(n, 1.0)?;
            checks.push(Check::at_most(format!("{}/mass - 1", model.name()), "t=1", (mass - 1.0).abs(), 1e-6));
        }
        _ => {}
    }
    let tables = table_path(&kc.table, &config, "kernel").map(|p| (p, table.into_bytes())).into_iter().collect();
    Ok(Outcome { report: Report::new("kernel", echo(&config), checks), tables })
}

/// True when `path` names a file in an existing directory.
pub fn writable_target(path: &Path) -> bool {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.is_dir(),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_table_paths() {
        let mut c = Config::default();
        assert_eq!(table_path(&None, &c, "cloud"), None);
        c.out = Some(PathBuf::from("runs/r1.json"));
        assert_eq!(table_path(&None, &c, "cloud"), Some(PathBuf::from("runs/r1.cloud.csv")));
        assert_eq!(table_path(&Some("x.csv".into()), &c, "cloud"), Some(PathBuf::from("x.csv")));
    }

    #[test]
    fn flow_and_reach_need_a_model() {
        assert!(matches!(flow(Config::default()), Err(CliError::Config(_))));
        assert!(matches!(reach(Config::default()), Err(CliError::Config(_))));
    }

    #[test]
    fn models_listing_has_nine_rows() {
        let v: serde_json::Value = serde_json::from_str(&models(Format::Json)).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 9);
        assert_eq!(models(Format::Csv).lines().count(), 10);
    }

    #[test]
    fn martin_degenerate_sequence_is_an_error() {
        let mut c = Config::default();
        c.martin.base_time = -200.0;
        assert!(matches!(martin(c), Err(CliError::Core(_))));
    }

    #[test]
    fn solve_constant_is_exact() {
        let mut c = Config { model: "heat(1)".into(), ..Default::default() };
        c.solve.initial = "constant".into();
        c.solve.boundary = "frozen".into();
        c.solve.points = 21;
        let out = solve(c).unwrap();
        assert!(out.report.all_passed(), "{:?}", out.report.checks);
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        let c = Config { suites: vec!["nope".into()], ..Default::default() };
        assert!(matches!(verify(c), Err(CliError::Config(_))));
        let c = Config { model: "cmp".into(), suites: vec!["martin".into()], ..Default::default() };
        assert!(matches!(verify(c), Err(CliError::Config(_))));
    }
}
