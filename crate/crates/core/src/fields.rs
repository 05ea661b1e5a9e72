//! Vector fields, Lie brackets and invariance checks.
//!
//! A field is identified with its coefficient map `p ↦ b(p)`, acting on
//! functions as `X f(p) = ⟨∇f(p), b(p)⟩`. Builtin fields are analytic
//! ([`Expr`] coefficients, exact Jacobians); user fields may be plain closures,
//! in which case the Jacobian is a central difference with step
//! `1e-5·max(1, ‖p‖)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg;
use crate::math;
use crate::models::OperatorModel;
use crate::point::Point;

/// Relative pivot threshold of [`hormander_rank`].
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Central-difference step used by [`left_invariance_residual`].
pub const INVARIANCE_STEP: f64 = 1e-5;

type CoeffFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A vector field on `R^d`.
#[derive(Clone)]
pub enum VectorField {
    /// Coefficients given symbolically.
    Analytic(Vec<Expr>),
    /// Coefficients given by a closure of the stated dimension.
    Sampled {
        /// Dimension of the ambient space.
        dim: usize,
        /// Coefficient map.
        coeff: Arc<CoeffFn>,
    },
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Analytic(c) => f.debug_tuple("Analytic").field(c).finish(),
            VectorField::Sampled { dim, .. } => f.debug_struct("Sampled").field("dim", dim).finish(),
        }
    }
}

impl VectorField {
    /// Field with symbolic coefficients.
    pub fn analytic(coeffs: Vec<Expr>) -> Self {
        VectorField::Analytic(coeffs)
    }

    /// Field given by a closure; its Jacobian is taken by central differences.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        VectorField::Sampled { dim, coeff: Arc::new(f) }
    }

    /// The zero field on `R^dim`.
    pub fn zero(dim: usize) -> Self {
        VectorField::Analytic(vec![Expr::zero(); dim])
    }

    /// The coordinate field `∂_{p_i}` on `R^dim`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut c = vec![Expr::zero(); dim];
        c[i] = Expr::c(1.0);
        VectorField::Analytic(c)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            VectorField::Analytic(c) => c.len(),
            VectorField::Sampled { dim, .. } => *dim,
        }
    }

    /// True when the Jacobian is exact.
    pub fn has_analytic_jacobian(&self) -> bool {
        matches!(self, VectorField::Analytic(_))
    }

    /// Symbolic coefficients, when available.
    pub fn coefficients(&self) -> Option<&[Expr]> {
        match self {
            VectorField::Analytic(c) => Some(c),
            VectorField::Sampled { .. } => None,
        }
    }

    /// True when the field is the literal zero field.
    pub fn is_zero(&self) -> bool {
        match self {
            VectorField::Analytic(c) => c.iter().all(Expr::is_zero),
            VectorField::Sampled { .. } => false,
        }
    }

    /// `b(p)`.
    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        match self {
            VectorField::Analytic(c) => c.iter().map(|e| e.eval(p)).collect(),
            VectorField::Sampled { coeff, .. } => coeff(p),
        }
    }

    /// Jacobian rows `J[k][i] = ∂b_k/∂p_i` at `p`.
    pub fn jacobian(&self, p: &[f64]) -> Vec<Vec<f64>> {
        match self {
            VectorField::Analytic(c) => c.iter().map(|e| (0..p.len()).map(|i| e.diff(i).eval(p)).collect()).collect(),
            VectorField::Sampled { dim, coeff } => numeric_jacobian(*dim, coeff.as_ref(), p),
        }
    }

    /// `X f(p)` by a central difference of step `h` along `b(p)`.
    pub fn apply<F: Fn(&[f64]) -> f64>(&self, f: F, p: &[f64], h: f64) -> f64 {
        let b = self.eval(p);
        let fwd: Vec<f64> = p.iter().zip(&b).map(|(x, v)| x + h * v).collect();
        let bwd: Vec<f64> = p.iter().zip(&b).map(|(x, v)| x - h * v).collect();
        (f(&fwd) - f(&bwd)) / (2.0 * h)
    }

    /// `c·X`.
    pub fn scaled(&self, c: f64) -> VectorField {
        match self {
            VectorField::Analytic(e) => VectorField::Analytic(e.iter().map(|x| x.clone() * c).collect()),
            VectorField::Sampled { dim, coeff } => {
                let coeff = coeff.clone();
                VectorField::from_fn(*dim, move |p| coeff(p).into_iter().map(|v| c * v).collect())
            }
        }
    }

    /// `X + Z`.
    pub fn sum(&self, other: &VectorField) -> Result<VectorField> {
        check_dims(self, other)?;
        Ok(match (self, other) {
            (VectorField::Analytic(a), VectorField::Analytic(b)) => {
                VectorField::Analytic(a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect())
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                VectorField::from_fn(self.dim(), move |p| {
                    a.eval(p).into_iter().zip(b.eval(p)).map(|(x, y)| x + y).collect()
                })
            }
        })
    }

    /// Embeds a field on `R^d` into `R^{d+1}` with last component `last`.
    /// Coefficients do not depend on the new coordinate.
    pub fn extended(&self, last: f64) -> VectorField {
        match self {
            VectorField::Analytic(c) => {
                let mut c = c.clone();
                c.push(Expr::c(last));
                VectorField::Analytic(c)
            }
            VectorField::Sampled { dim, coeff } => {
                let (d, coeff) = (*dim, coeff.clone());
                VectorField::from_fn(d + 1, move |p| {
                    let mut v = coeff(&p[..d]);
                    v.push(last);
                    v
                })
            }
        }
    }

    /// Lie bracket `[X, Z](p) = DZ(p)·X(p) − DX(p)·Z(p)`.
    ///
    /// Symbolic when both fields are analytic, so antisymmetry is exact.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        check_dims(self, other)?;
        let d = self.dim();
        if let (VectorField::Analytic(x), VectorField::Analytic(z)) = (self, other) {
            let coeffs = (0..d)
                .map(|k| {
                    let mut acc = Expr::zero();
                    for i in 0..d {
                        if !x[i].is_zero() {
                            let dz = z[k].diff(i);
                            if !dz.is_zero() {
                                acc = acc + x[i].clone() * dz;
                            }
                        }
                        if !z[i].is_zero() {
                            let dx = x[k].diff(i);
                            if !dx.is_zero() {
                                acc = acc - z[i].clone() * dx;
                            }
                        }
                    }
                    acc
                })
                .collect();
            return Ok(VectorField::Analytic(coeffs));
        }
        let (x, z) = (self.clone(), other.clone());
        Ok(VectorField::from_fn(d, move |p| {
            let (xv, zv) = (x.eval(p), z.eval(p));
            let (jx, jz) = (x.jacobian(p), z.jacobian(p));
            (0..d).map(|k| math::dot(&jz[k], &xv) - math::dot(&jx[k], &zv)).collect()
        }))
    }
}

fn check_dims(a: &VectorField, b: &VectorField) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

fn numeric_jacobian(dim: usize, f: &CoeffFn, p: &[f64]) -> Vec<Vec<f64>> {
    let h = 1e-5 * math::sqrt(math::norm_sq(p)).max(1.0);
    let mut jac = vec![vec![0.0; p.len()]; dim];
    let mut q = p.to_vec();
    for i in 0..p.len() {
        q[i] = p[i] + h;
        let fp = f(&q);
        q[i] = p[i] - h;
        let fm = f(&q);
        q[i] = p[i];
        for k in 0..dim {
            jac[k][i] = (fp[k] - fm[k]) / (2.0 * h);
        }
    }
    jac
}

/// Free-function form of [`VectorField::bracket`].
pub fn bracket(x: &VectorField, z: &VectorField) -> Result<VectorField> {
    x.bracket(z)
}

/// The drift `Y = X_0 − ∂_t` of a model, as a field on `R^{N+1}`.
pub fn drift(model: &OperatorModel) -> VectorField {
    model.drift()
}

/// Dimension of the span of `X_1, …, X_m, Y` and their iterated brackets of
/// order at most `max_order` at `z` (order 1 = the fields themselves).
pub fn hormander_rank(model: &OperatorModel, z: &Point, max_order: usize) -> usize {
    let p = z.to_vec();
    let base: Vec<VectorField> =
        (0..model.m()).map(|j| model.generator_spacetime(j)).chain(core::iter::once(model.drift())).collect();
    let mut rows: Vec<Vec<f64>> = base.iter().map(|f| f.eval(&p)).collect();
    let mut level = base.clone();
    for _ in 1..max_order.max(1) {
        let mut next = Vec::new();
        for b in &base {
            for g in &level {
                let br = b.bracket(g).expect("builtin fields share a dimension");
                if !br.is_zero() {
                    rows.push(br.eval(&p));
                    next.push(br);
                }
            }
        }
        level = next;
    }
    linalg::rank(&rows, RANK_TOLERANCE)
}

/// Smallest order at which [`hormander_rank`] reaches `N+1` at `z`, searching
/// up to `max_order`.
pub fn minimal_hormander_order(model: &OperatorModel, z: &Point, max_order: usize) -> Option<usize> {
    (1..=max_order).find(|&k| hormander_rank(model, z, k) == model.n() + 1)
}

/// `|(X_j f)(ζ∘z) − X_j(f(ζ∘·))(z)|`, both sides by central differences of
/// step [`INVARIANCE_STEP`]. `j < m` picks a generator; `j = m` picks the
/// drift `Y`.
pub fn left_invariance_residual<F>(model: &OperatorModel, j: usize, zeta: &Point, z: &Point, f: F) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let field = match j.cmp(&model.m()) {
        core::cmp::Ordering::Less => model.generator_spacetime(j),
        core::cmp::Ordering::Equal => model.drift(),
        core::cmp::Ordering::Greater => return Err(Error::IndexOutOfRange { index: j, len: model.m() + 1 }),
    };
    let law = model.law();
    let h = INVARIANCE_STEP;
    let moved = law.compose(zeta, z)?;
    let lhs = field.apply(|q| f(&Point::from_slice(q)), &moved.to_vec(), h);
    let translated = |q: &[f64]| {
        let w = law.compose(zeta, &Point::from_slice(q)).expect("dimension checked above");
        f(&w)
    };
    let rhs = field.apply(translated, &z.to_vec(), h);
    Ok(math::abs(lhs - rhs))
}

/// `(x, t) ↦ e^{−λt} u(x, t)`.
pub fn gauge_shift<U>(u: U, lambda: f64) -> impl Fn(&Point) -> f64
where
    U: Fn(&Point) -> f64,
{
    move |z: &Point| math::exp(-lambda * z.time) * u(z)
}

/// Smooth test functions for the invariance suite: polynomials of degree at
/// most 3 optionally multiplied by a sine or cosine of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `Σ x_i²`.
    SumSquares,
    /// `Π x_i` over the spatial coordinates.
    CoordinateProduct,
    /// `sin(x_i) cos(x_j)`.
    SinCos(usize, usize),
    /// `(1 + x_i + x_j² + x_k³) · cos(x_l)`.
    CubicCos(usize, usize, usize, usize),
}

impl TestFunction {
    /// The fixed family used by the invariance suite for spatial dimension `n`.
    pub fn family(n: usize) -> Vec<TestFunction> {
        let last = n.saturating_sub(1);
        vec![
            TestFunction::SumSquares,
            TestFunction::CoordinateProduct,
            TestFunction::SinCos(0, 1.min(last)),
            TestFunction::CubicCos(last, 0, 1.min(last), 0),
        ]
    }

    /// Evaluates at a space-time point (the time coordinate is ignored).
    pub fn eval(&self, z: &Point) -> f64 {
        let x = &z.spatial;
        match *self {
            TestFunction::SumSquares => math::norm_sq(x),
            TestFunction::CoordinateProduct => x.iter().product(),
            TestFunction::SinCos(i, j) => math::sin(x[i]) * math::cos(x[j]),
            TestFunction::CubicCos(i, j, k, l) => (1.0 + x[i] + x[j] * x[j] + x[k] * x[k] * x[k]) * math::cos(x[l]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::OperatorModel;

    #[test]
    fn heisenberg_generators_bracket_to_vertical() {
        let model = OperatorModel::heisenberg_heat();
        let b = model.generator(0).bracket(model.generator(1)).unwrap();
        for p in [[0.0, 0.0, 0.0], [1.5, -2.0, 7.0]] {
            assert_eq!(b.eval(&p), vec![0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn self_bracket_vanishes() {
        let model = OperatorModel::mumford();
        let y = model.drift();
        let b = y.bracket(&y).unwrap();
        assert!(b.eval(&[0.3, 1.0, 2.0, 0.0]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn kolmogorov_bracket_is_transport_direction() {
        let dx = VectorField::coordinate(2, 0);
        let x_dy = VectorField::analytic(vec![Expr::zero(), Expr::var(0)]);
        let b = dx.bracket(&x_dy).unwrap();
        assert_eq!(b.eval(&[3.0, -1.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn sampled_bracket_matches_analytic() {
        let x = VectorField::analytic(vec![Expr::c(1.0), Expr::var(0) * Expr::var(0)]);
        let z = VectorField::analytic(vec![Expr::var(1).sin(), Expr::c(0.5)]);
        let xs = {
            let x = x.clone();
            VectorField::from_fn(2, move |p| x.eval(p))
        };
        let exact = x.bracket(&z).unwrap().eval(&[0.4, 0.9]);
        let approx = xs.bracket(&z).unwrap().eval(&[0.4, 0.9]);
        for (a, b) in exact.iter().zip(&approx) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(!xs.has_analytic_jacobian());
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let a = VectorField::zero(2);
        let b = VectorField::zero(3);
        assert!(matches!(a.bracket(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rank_examples() {
        let heat = OperatorModel::heat(2);
        assert_eq!(hormander_rank(&heat, &Point::origin(2), 1), 3);
        let mum = OperatorModel::mumford();
        let z = Point::new(vec![0.0, 0.4, -1.0], 0.0);
        assert_eq!(hormander_rank(&mum, &z, 3), 4);
        assert_eq!(hormander_rank(&mum, &z, 2), 3);
        let kol = OperatorModel::kolmogorov(1);
        assert_eq!(hormander_rank(&kol, &Point::new(vec![0.2, 5.0], 1.0), 2), 3);
    }

    #[test]
    fn gauge_shift_examples() {
        let one = |_: &Point| 1.0;
        let z = Point::new(vec![0.0], 2.0);
        assert_eq!(gauge_shift(one, 0.0)(&z), 1.0);
        assert!((gauge_shift(one, 1.0)(&z) - libm::exp(-2.0)).abs() < 1e-15);
        let grow = |z: &Point| libm::exp(0.7 * z.time);
        let shifted = gauge_shift(grow, 0.7);
        assert!((shifted(&Point::new(vec![1.0], -3.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invariance_rejects_bad_index() {
        let heat = OperatorModel::heat(1);
        let z = Point::origin(1);
        let err = left_invariance_residual(&heat, 3, &z, &z, |_| 0.0).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 3, len: 2 });
    }
}
