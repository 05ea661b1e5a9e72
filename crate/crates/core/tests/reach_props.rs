use hypoelliptic::flows::exp_map;
use hypoelliptic::reach::{
    interior_coverage, membership, membership_in_box, sample_attainable, SamplerConfig, Verdict,
};
use hypoelliptic::{OperatorModel, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLACK: f64 = 1e-6;

fn config(n_paths: usize, seed: u64) -> SamplerConfig {
    SamplerConfig { n_paths, segments: 4, omega_bound: 3.0, horizon: 1.0, seed }
}

#[test]
fn sampled_endpoints_are_sound() {
    let models = [
        OperatorModel::mumford(),
        OperatorModel::cmp(),
        OperatorModel::heat(2),
        OperatorModel::heisenberg_heat(),
        OperatorModel::grushin(),
        OperatorModel::grushin_lifted(),
    ];
    for (i, model) in models.iter().enumerate() {
        let z0 = Point::new(vec![0.3; model.n()], 0.5);
        let cloud = sample_attainable(model, &z0, &config(2000, i as u64)).unwrap();
        assert_eq!(cloud.dropped, 0);
        for e in &cloud.endpoints {
            let v = membership(model, &z0, e);
            assert!(v.within(SLACK), "{}: {e:?} margin {}", model.name(), v.margin);
            assert!(e.time >= z0.time - cloud.horizon && e.time <= z0.time);
        }
    }
}

#[test]
fn cmp_attainable_set_is_dilation_invariant() {
    let cmp = OperatorModel::cmp();
    let dil = cmp.dilation().unwrap();
    let origin = Point::origin(3);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    while checked < 100 {
        let z = Point::new(
            vec![rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..3.0), rng.gen_range(-2.0..2.0)],
            rng.gen_range(-3.0..1.0),
        );
        let r = rng.gen_range(0.2..3.0);
        let a = membership(&cmp, &origin, &z);
        if a.margin.abs() < 1e-6 {
            continue;
        }
        let b = membership(&cmp, &origin, &dil.apply(r, &z).unwrap());
        assert_eq!(a.verdict, b.verdict, "{z:?} r={r}");
        checked += 1;
    }
}

#[test]
fn oracles_are_translation_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for model in [OperatorModel::mumford(), OperatorModel::cmp()] {
        let law = model.law();
        let origin = law.identity();
        let mut checked = 0;
        while checked < 100 {
            let z0 = Point::new((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect(), rng.gen_range(-1.0..1.0));
            let z = Point::new((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect(), rng.gen_range(-3.0..1.0));
            let direct = membership(&model, &z0, &z);
            let moved = membership(&model, &origin, &law.compose(&law.inverse(&z0).unwrap(), &z).unwrap());
            if direct.margin.abs() < 1e-6 || moved.margin.abs() < 1e-6 {
                continue;
            }
            assert_eq!(direct.verdict, moved.verdict, "{}: {z0:?} {z:?}", model.name());
            checked += 1;
        }
    }
}

#[test]
fn cmp_drift_point_is_on_the_boundary() {
    let cmp = OperatorModel::cmp();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let z0 = Point::new((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect(), rng.gen_range(-1.0..1.0));
        let s = rng.gen_range(0.1..2.0);
        let z = exp_map(&cmp, &[0.0], s, &z0).unwrap();
        let v = membership(&cmp, &z0, &z);
        assert_eq!(v.verdict, Verdict::Boundary, "{z0:?} s={s}: {}", v.margin);
        assert!(v.margin.abs() <= 1e-9);
    }
}

/// Twenty seeded points of the Mumford cone with slack at least 0.2.
fn mumford_probes() -> Vec<Point> {
    let mum = OperatorModel::mumford();
    let z0 = Point::origin(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut probes = Vec::new();
    while probes.len() < 20 {
        let t = rng.gen_range(-0.7..-0.3);
        let p = Point::new(vec![rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)], t);
        if membership(&mum, &z0, &p).margin >= 0.2 {
            probes.push(p);
        }
    }
    probes
}

#[test]
fn mumford_interior_is_covered() {
    let mum = OperatorModel::mumford();
    let z0 = Point::origin(3);
    let probes = mumford_probes();
    // small turning rates leave endpoints near the cone wall, so the bound has to be generous
    let cfg = SamplerConfig { n_paths: 10_000, segments: 4, omega_bound: 20.0, horizon: 1.0, seed: 34 };
    let cloud = sample_attainable(&mum, &z0, &cfg).unwrap();
    let cov = interior_coverage(&mum, &z0, &cloud, &probes, 0.15).unwrap();
    assert!(cov >= 0.9, "coverage {cov}");
}

#[test]
fn driftless_cylinders() {
    let heis = OperatorModel::heisenberg_heat();
    let z0 = Point::origin(3);
    let b = [(-1.0, 1.0); 3];
    let v = membership_in_box(&heis, &z0, &Point::new(vec![0.9, -0.9, 0.5], -0.1), &b).unwrap();
    assert_eq!(v.verdict, Verdict::Inside);
    let v = membership_in_box(&heis, &z0, &Point::new(vec![0.9, -0.9, 0.5], 0.1), &b).unwrap();
    assert_eq!(v.verdict, Verdict::Outside);
    let v = membership_in_box(&heis, &z0, &Point::new(vec![0.0, 0.0, 0.0], 0.0), &b).unwrap();
    assert_eq!(v.verdict, Verdict::Boundary);
}
