use hypoelliptic::fields::{
    gauge_shift, hormander_rank, left_invariance_residual, minimal_hormander_order, TestFunction,
};
use hypoelliptic::kernels::pde_residual;
use hypoelliptic::{ModelKind, OperatorModel, Point, VectorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Point {
    Point::new((0..n).map(|_| rng.gen_range(-r..r)).collect(), rng.gen_range(-r..r))
}

/// Generators and drift of a model as space-time fields.
fn fields_of(model: &OperatorModel) -> Vec<VectorField> {
    (0..model.m()).map(|j| model.generator_spacetime(j)).chain([model.drift()]).collect()
}

#[test]
fn jacobi_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for model in OperatorModel::catalog() {
        let f = fields_of(&model);
        let k = f.len();
        for i in 0..100 {
            let (x, z, w) = (&f[i % k], &f[(i / k) % k], &f[(i / (k * k)) % k]);
            let jac = [
                x.bracket(&z.bracket(w).unwrap()).unwrap(),
                z.bracket(&w.bracket(x).unwrap()).unwrap(),
                w.bracket(&x.bracket(z).unwrap()).unwrap(),
            ];
            let p = random_point(&mut rng, model.n(), 3.0).to_vec();
            let total = jac
                .iter()
                .map(|b| b.eval(&p))
                .fold(vec![0.0; p.len()], |acc, v| acc.iter().zip(&v).map(|(a, b)| a + b).collect());
            assert!(total.iter().all(|c| c.abs() <= 1e-8), "{}: {total:?}", model.name());
        }
    }
}

#[test]
fn antisymmetry_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for model in OperatorModel::catalog() {
        let f = fields_of(&model);
        for a in &f {
            for b in &f {
                let p = random_point(&mut rng, model.n(), 3.0).to_vec();
                let ab = a.bracket(b).unwrap().eval(&p);
                let ba = b.bracket(a).unwrap().eval(&p);
                assert!(ab.iter().zip(&ba).all(|(x, y)| x + y == 0.0), "{}", model.name());
            }
        }
    }
}

#[test]
fn hormander_rank_at_documented_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for model in OperatorModel::catalog() {
        let order = model.hormander_order().unwrap();
        let full = model.n() + 1;
        for _ in 0..100 {
            let z = random_point(&mut rng, model.n(), 3.0);
            assert_eq!(hormander_rank(&model, &z, order), full, "{} at {z:?}", model.name());
        }
        if order > 1 {
            // grushin degenerates on x = 0 only
            let mut probe = random_point(&mut rng, model.n(), 3.0);
            if model.kind() == ModelKind::Grushin {
                probe.spatial[0] = 0.0;
            }
            assert!(hormander_rank(&model, &probe, order - 1) < full, "{}", model.name());
        }
    }
}

#[test]
fn minimal_orders_are_discovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for model in OperatorModel::catalog() {
        let mut worst = 0;
        for i in 0..50 {
            let mut z = random_point(&mut rng, model.n(), 3.0);
            if i == 0 {
                z.spatial[0] = 0.0;
            }
            worst = worst.max(minimal_hormander_order(&model, &z, 5).unwrap());
        }
        assert_eq!(Some(worst), model.hormander_order(), "{}", model.name());
    }
}

#[test]
fn linked_brackets_reproduce_components() {
    let model = OperatorModel::linked();
    let x1 = model.generator_spacetime(0);
    let x2 = model.generator_spacetime(1);
    let y = model.drift();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let p = random_point(&mut rng, 4, 3.0).to_vec();
        let b12 = x1.bracket(&x2).unwrap().eval(&p);
        let b1y = x1.bracket(&y).unwrap().eval(&p);
        // (x, y, s, w, t): the generator bracket is vertical in s, the drift bracket in w
        for (got, want) in b12.iter().zip([0.0, 0.0, -2.0, 0.0, 0.0]) {
            assert!((got - want).abs() <= 1e-8);
        }
        for (got, want) in b1y.iter().zip([0.0, 0.0, 0.0, 1.0, 0.0]) {
            assert!((got - want).abs() <= 1e-8);
        }
    }
}

#[test]
fn bracket_examples_are_exact() {
    let heis = OperatorModel::heisenberg_heat();
    let kol = OperatorModel::kolmogorov(1);
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let p = random_point(&mut rng, 3, 5.0).spatial;
        let b = heis.generator(0).bracket(heis.generator(1)).unwrap().eval(&p);
        assert!((b[0]).abs() <= 1e-12 && b[1].abs() <= 1e-12 && (b[2] - 1.0).abs() <= 1e-12);
        let q = &p[..2];
        let b = kol.generator(0).bracket(kol.drift_x0()).unwrap().eval(q);
        assert!(b[0].abs() <= 1e-12 && (b[1] - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn mumford_rank_at_origin_slice() {
    let mum = OperatorModel::mumford();
    let z = Point::new(vec![0.0, 1.0, -2.0], 0.5);
    assert_eq!(hormander_rank(&mum, &z, 3), 4);
    assert_eq!(hormander_rank(&OperatorModel::heat(3), &z, 1), 4);
}

#[test]
fn gauge_shift_of_heat_growth_is_a_solution() {
    let heat = OperatorModel::heat(1);
    let lambda = 0.8;
    let u = move |z: &Point| (lambda * z.time).exp();
    let shifted = gauge_shift(u, lambda);
    for t in [-1.0, 0.0, 2.0] {
        let z = Point::new(vec![0.3], t);
        assert!((shifted(&z) - 1.0).abs() < 1e-15);
        assert!(pde_residual(&heat, &shifted, &z, 1e-3).unwrap().abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generators_and_drift_are_left_invariant(
        zeta in prop::collection::vec(-2.0..2.0f64, 5),
        z in prop::collection::vec(-2.0..2.0f64, 5),
    ) {
        for model in OperatorModel::catalog().into_iter().filter(|m| m.is_left_invariant()) {
            let n = model.n();
            let zeta = Point::new(zeta[..n].to_vec(), zeta[4]);
            let z = Point::new(z[..n].to_vec(), z[4]);
            let moved = model.law().compose(&zeta, &z).unwrap();
            for f in TestFunction::family(n) {
                let scale = 1.0 + f.eval(&moved).abs();
                for j in 0..=model.m() {
                    let r = left_invariance_residual(&model, j, &zeta, &z, |p| f.eval(p)).unwrap();
                    prop_assert!(r <= 1e-5 * scale, "{} j={j} {f:?}: {r}", model.name());
                }
            }
        }
    }
}

#[test]
fn invariance_examples() {
    let heat = OperatorModel::heat(2);
    let z = Point::new(vec![0.4, -1.0], 0.0);
    let zeta = Point::new(vec![3.0, 1.0], 2.0);
    let r = left_invariance_residual(&heat, 0, &zeta, &z, |p| TestFunction::SumSquares.eval(p)).unwrap();
    assert!(r <= 1e-6);
    let heis = OperatorModel::heisenberg_heat();
    let zeta = Point::new(vec![1.0, 2.0, 3.0], 0.0);
    let z = Point::new(vec![0.5, -0.5, 1.0], 0.0);
    for j in 0..2 {
        let r = left_invariance_residual(&heis, j, &zeta, &z, |p| TestFunction::CoordinateProduct.eval(p)).unwrap();
        assert!(r <= 1e-5);
    }
    let kol = OperatorModel::kolmogorov(1);
    let zeta = Point::new(vec![1.0, 1.0], 1.0);
    let r = left_invariance_residual(&kol, 0, &zeta, &Point::new(vec![0.2, 0.3], 0.0), |p| {
        TestFunction::SinCos(0, 1).eval(p)
    })
    .unwrap();
    assert!(r <= 1e-5);
}

#[test]
fn grushin_is_not_translation_invariant() {
    let g = OperatorModel::grushin();
    assert!(!g.is_left_invariant());
    let zeta = Point::new(vec![1.0, 0.0], 0.0);
    let z = Point::new(vec![0.5, 0.0], 0.0);
    let r = left_invariance_residual(&g, 1, &zeta, &z, |p| p.spatial[1]).unwrap();
    assert!(r > 0.5);
}
