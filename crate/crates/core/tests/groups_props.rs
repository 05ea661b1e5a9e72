use hypoelliptic::groups::{automorphism_residual, GROUP_TOLERANCE};
use hypoelliptic::{GroupLaw, OperatorModel, Point};
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = Point> {
    (prop::collection::vec(-10.0..10.0f64, n), -10.0..10.0f64).prop_map(|(x, t)| Point::new(x, t))
}

/// Reuses the coordinates of `p` cyclically to fill dimension `n`.
fn fit(p: &Point, n: usize) -> Point {
    Point::new(p.spatial.iter().cycle().take(n).copied().collect(), p.time)
}

fn scale(points: &[&Point]) -> f64 {
    points.iter().map(|p| p.sup_norm()).fold(1.0, f64::max)
}

// Associativity of a quadratic law loses up to |a|·|b|·|c| in magnitude.
fn tol(points: &[&Point]) -> f64 {
    GROUP_TOLERANCE * scale(points).powi(3)
}

fn laws() -> Vec<OperatorModel> {
    let mut v = OperatorModel::catalog();
    v.push(OperatorModel::kolmogorov(2));
    v.push(OperatorModel::heat(3));
    v.push(OperatorModel::ou(2));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(a in point(4), b in point(4), c in point(4)) {
        for model in laws() {
            let n = model.n();
            let (a, b, c) = (fit(&a, n), fit(&b, n), fit(&c, n));
            let law = model.law();
            let e = law.identity();
            let abc = law.compose(&law.compose(&a, &b).unwrap(), &c).unwrap();
            let tol_assoc = tol(&[&a, &b, &c]).max(GROUP_TOLERANCE * abc.sup_norm());
            prop_assert!(law.associativity_residual(&a, &b, &c).unwrap() <= tol_assoc, "{}", model.name());
            prop_assert!(law.compose(&e, &a).unwrap().sup_distance(&a) <= GROUP_TOLERANCE);
            prop_assert!(law.compose(&a, &e).unwrap().sup_distance(&a) <= GROUP_TOLERANCE);
            let inv = law.inverse(&a).unwrap();
            // the Ornstein-Uhlenbeck law scales by e^{|t|}
            let tol_inv = GROUP_TOLERANCE * scale(&[&a]).powi(3) * a.time.abs().exp();
            prop_assert!(law.compose(&a, &inv).unwrap().sup_distance(&e) <= tol_inv, "{}", model.name());
            prop_assert!(law.compose(&inv, &a).unwrap().sup_distance(&e) <= tol_inv, "{}", model.name());
        }
    }

    #[test]
    fn dilations_are_automorphisms(r in 0.05..5.0f64, a in point(4), b in point(4)) {
        for model in laws() {
            let Some(dil) = model.dilation() else { continue };
            let (a, b) = (fit(&a, model.n()), fit(&b, model.n()));
            let res = automorphism_residual(&model.law(), dil, r, &a, &b).unwrap();
            let mag = scale(&[&a, &b]) * r.max(1.0);
            prop_assert!(res <= GROUP_TOLERANCE * mag.powi(5), "{}: {res}", model.name());
        }
    }

    #[test]
    fn dilation_composition(r in 0.1..4.0f64, s in 0.1..4.0f64, z in point(4)) {
        for model in laws() {
            let Some(dil) = model.dilation() else { continue };
            let z = fit(&z, model.n());
            let twice = dil.apply(r, &dil.apply(s, &z).unwrap()).unwrap();
            let once = dil.apply(r * s, &z).unwrap();
            let mag = once.sup_norm().max(1.0);
            prop_assert!(twice.sup_distance(&once) <= 1e-12 * mag);
            prop_assert_eq!(dil.apply(1.0, &z).unwrap(), z);
        }
    }

    #[test]
    fn first_layer_is_additive(a in point(4), b in point(4)) {
        for model in laws() {
            let Some(layers) = model.layers() else { continue };
            let (a, b) = (fit(&a, model.n()), fit(&b, model.n()));
            let c = model.law().compose(&a, &b).unwrap();
            for &i in layers.first() {
                prop_assert_eq!(c.spatial[i], a.spatial[i] + b.spatial[i]);
            }
        }
    }

    #[test]
    fn heisenberg_last_layer_is_central(zc in -10.0..10.0f64, b in point(3)) {
        let law = GroupLaw::Heisenberg;
        let a = Point::new(vec![0.0, 0.0, zc], 0.0);
        let ab = law.compose(&a, &b).unwrap();
        let ba = law.compose(&b, &a).unwrap();
        let sum = a.add(&b);
        prop_assert!(ab.sup_distance(&sum) <= 1e-12);
        prop_assert!(ba.sup_distance(&sum) <= 1e-12);
    }
}

#[test]
fn layer_sizes_match_generators() {
    for model in OperatorModel::catalog() {
        if let Some(layers) = model.layers() {
            assert_eq!(layers.sizes().iter().sum::<usize>(), model.n());
            assert_eq!(layers.first().len(), model.m(), "{}", model.name());
        }
    }
}

#[test]
fn printed_examples() {
    let h = GroupLaw::HeisenbergUnitSkew;
    let c = h.compose(&Point::new(vec![1.0, 0.0, 0.0], 0.0), &Point::new(vec![0.0, 1.0, 0.0], 0.0)).unwrap();
    assert_eq!(c.spatial, vec![1.0, 1.0, -1.0]);
    let k = GroupLaw::Kolmogorov { m: 1 };
    let c = k.compose(&Point::new(vec![1.0, 0.0], 0.0), &Point::new(vec![0.0, 0.0], 1.0)).unwrap();
    assert_eq!(c, Point::new(vec![1.0, -1.0], 1.0));
    assert_eq!(k.inverse(&Point::new(vec![2.0, 3.0], 5.0)).unwrap(), Point::new(vec![-2.0, -13.0], -5.0));
    let kol = OperatorModel::kolmogorov(1);
    let d = kol.dilation().unwrap().apply(2.0, &Point::new(vec![1.0, 1.0], 1.0)).unwrap();
    assert_eq!(d, Point::new(vec![2.0, 8.0], 4.0));
    let cmp = OperatorModel::cmp();
    let d = cmp.dilation().unwrap().apply(2.0, &Point::new(vec![1.0, 1.0, 1.0], 1.0)).unwrap();
    assert_eq!(d, Point::new(vec![2.0, 16.0, 8.0], 4.0));
    assert!(cmp.dilation().unwrap().apply(0.0, &Point::origin(3)).is_err());
}
