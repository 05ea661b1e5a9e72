//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};
use std::thread;

use hypoelliptic::OperatorModel;
use hypoelliptic_cli::config::Config;
use hypoelliptic_cli::report::Check;
use hypoelliptic_cli::suites::Suite;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn checks(model: &OperatorModel, suite: Suite) -> Vec<Check> {
    suite.run(model, &Config::default()).unwrap_or_else(|e| {
        vec![Check::at_most(format!("{}/{suite} error", model.name()), e.to_string(), f64::NAN, 0.0)]
    })
}

/// Every named check must be present and passing; returns the measured values.
fn require(model: &str, suite: Suite, wanted: &[&str]) -> Outcome {
    let model = OperatorModel::by_name(model).map_err(|e| e.to_string())?;
    let got = checks(&model, suite);
    let crash = format!("{}/{suite} error", model.name());
    if let Some(bad) = got.iter().find(|c| c.name == crash) {
        return Err(format!("{}: {}", bad.name, bad.inputs));
    }
    let mut notes = Vec::new();
    for w in wanted {
        let full = format!("{}/{w}", model.name());
        let c = got.iter().find(|c| c.name == full).ok_or_else(|| format!("{full} missing"))?;
        if !c.passed {
            return Err(format!("{full}: {:e} > {:e}", c.measured, c.threshold));
        }
        notes.push(format!("{w}={:.1e}", c.measured));
    }
    Ok(notes.join(" "))
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let mut notes = Vec::new();
    for p in parts {
        notes.push(p?);
    }
    Ok(format!("{} model runs ok", notes.len()))
}

fn catalog_names() -> Vec<String> {
    OperatorModel::catalog().iter().map(|m| m.name().to_string()).collect()
}

fn groups() -> Outcome {
    all(catalog_names()
        .iter()
        .map(|name| {
            let model = OperatorModel::by_name(name).unwrap();
            let mut wanted = vec!["associativity", "identity", "inverse"];
            if model.dilation().is_some() {
                wanted.extend(["dilation automorphism", "dilation composition"]);
            }
            require(name, Suite::Groups, &wanted)
        })
        .collect())
}

fn flows() -> Outcome {
    all(catalog_names().iter().map(|n| require(n, Suite::Flows, &["closed form vs rk4", "semigroup"])).collect())
}

fn heisenberg_loop() -> Outcome {
    require("heisenberg_heat", Suite::Loops, &["loop c=1 s=1 from origin", "loop closed form", "loop rk4"])
}

fn mumford_loop() -> Outcome {
    require(
        "mumford",
        Suite::Loops,
        &["forward leg closed form", "round trip closed form", "forward leg rk4", "round trip rk4"],
    )
}

fn hormander() -> Outcome {
    all(OperatorModel::catalog()
        .iter()
        .filter_map(|m| {
            let order = m.hormander_order()?;
            let mut wanted = vec!["hormander rank deficient points"];
            if order > 1 {
                wanted.push("hormander order is minimal");
            }
            Some(require(m.name(), Suite::Fields, &wanted))
        })
        .collect())
}

fn brackets() -> Outcome {
    let mut parts = vec![
        require("heisenberg_heat", Suite::Fields, &["[X1,X2] = d/dz"]),
        require("kolmogorov", Suite::Fields, &["[d/dx, x d/dy] = d/dy"]),
    ];
    parts.extend(catalog_names().iter().map(|n| require(n, Suite::Fields, &["bch loop residual halving ratio"])));
    all(parts)
}

fn kernel() -> Outcome {
    require(
        "kolmogorov",
        Suite::Kernel,
        &["kernel pde residual (relative)", "translation and dilation invariance", "mass / sqrt(2 pi) - 1"],
    )
}

fn martin() -> Outcome {
    require(
        "kolmogorov",
        Suite::Martin,
        &[
            "exponential family error decreases",
            "exponential family error at k=1000",
            "zero family at k=200",
            "bounded family exact zeros for t < tau",
        ],
    )
}

fn reach() -> Outcome {
    let mut parts: Vec<Outcome> = OperatorModel::catalog()
        .iter()
        .filter(|m| m.has_attainable_oracle())
        .map(|m| require(m.name(), Suite::Reach, &["endpoints outside attainable set", "dropped paths"]))
        .collect();
    parts.push(require("cmp", Suite::Reach, &["drift point classified boundary", "drift point margin"]));
    all(parts)
}

fn solver() -> Outcome {
    require(
        "kolmogorov",
        Suite::Solver,
        &[
            "extremal data interior error",
            "y-independence over all steps",
            "constant preserved",
            "negative values from nonnegative data",
        ],
    )
}

fn separation() -> Outcome {
    let mut parts: Vec<Outcome> = OperatorModel::catalog()
        .iter()
        .filter(|m| m.has_extremal_catalog())
        .map(|m| require(m.name(), Suite::Separation, &["separation ratio spread", "separation ratio vs exp(-s|v|^2)"]))
        .collect();
    parts.push(require("ou", Suite::Separation, &["minimal solution pde residual (relative)"]));
    all(parts)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_hypo")).args(args).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?} exited with {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    let verify = ["verify", "--suite", "groups,flows,reach", "--seed", "11", "--format", "csv"];
    if run(&verify)? != run(&verify)? {
        return Err("verify output differs between runs".into());
    }
    let mut clouds = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(format!("{name}.json"));
        run(&["reach", "--model", "cmp", "--seed", "5", "--out", out.to_str().unwrap()])?;
        let report = std::fs::read(&out).map_err(|e| e.to_string())?;
        let cloud = std::fs::read(dir.path().join(format!("{name}.cloud.csv"))).map_err(|e| e.to_string())?;
        clouds.push((report, cloud));
    }
    if clouds[0] != clouds[1] {
        return Err("reach report or cloud differs between runs".into());
    }
    Ok(format!("verify and reach byte-identical, cloud {} bytes", clouds[0].1.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("group axioms and dilations", groups),
        ("closed-form flows and semigroup", flows),
        ("heisenberg loop", heisenberg_loop),
        ("mumford loops", mumford_loop),
        ("hormander rank and minimal order", hormander),
        ("brackets and commutator loops", brackets),
        ("kolmogorov kernel", kernel),
        ("martin quotients", martin),
        ("attainable set soundness", reach),
        ("cauchy solver", solver),
        ("separation ratio", separation),
        ("deterministic cli output", determinism),
    ];
    let results: Vec<Outcome> = thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|(_, f)| s.spawn(f)).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("panicked".into()))).collect()
    });
    let mut failed = 0;
    for (i, ((label, _), result)) in criteria.iter().zip(&results).enumerate() {
        match result {
            Ok(note) => println!("criterion {}: PASS {label}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {label}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 12 passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
