//! Coefficient expressions with exact partial derivatives.
//!
//! Builtin vector fields have polynomial and single-coordinate trigonometric
//! coefficients. Keeping them as small expression trees gives exact Jacobians
//! at every bracket depth; finite differences of finite differences would not
//! survive third-order brackets.
//!
//! The constructors fold constants and drop neutral elements, nothing more.

use alloc::boxed::Box;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math;

/// A scalar expression in the coordinates `p[0], p[1], …`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Constant.
    Const(f64),
    /// Coordinate `p[i]`.
    Var(usize),
    /// Sum.
    Add(Box<Expr>, Box<Expr>),
    /// Product.
    Mul(Box<Expr>, Box<Expr>),
    /// Negation.
    Neg(Box<Expr>),
    /// Sine.
    Sin(Box<Expr>),
    /// Cosine.
    Cos(Box<Expr>),
}

impl Expr {
    /// Constant expression.
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    /// Coordinate `p[i]`.
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    /// `0`.
    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    /// True for the literal constant 0.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// `sin(self)`.
    pub fn sin(self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::Const(math::sin(c)),
            None => Expr::Sin(Box::new(self)),
        }
    }

    /// `cos(self)`.
    pub fn cos(self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::Const(math::cos(c)),
            None => Expr::Cos(Box::new(self)),
        }
    }

    /// Evaluates at `p`.
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => p[*i],
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Neg(a) => -a.eval(p),
            Expr::Sin(a) => math::sin(a.eval(p)),
            Expr::Cos(a) => math::cos(a.eval(p)),
        }
    }

    /// Partial derivative with respect to `p[var]`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => a.diff(var) + b.diff(var),
            Expr::Mul(a, b) => a.diff(var) * (**b).clone() + (**a).clone() * b.diff(var),
            Expr::Neg(a) => -a.diff(var),
            Expr::Sin(a) => a.diff(var) * (**a).clone().cos(),
            Expr::Cos(a) => -(a.diff(var) * (**a).clone().sin()),
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Mul(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => a.max_var(),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(0.0), None) => rhs,
            (None, Some(0.0)) => self,
            _ => Expr::Add(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(1.0), None) => rhs,
            (None, Some(1.0)) => self,
            (Some(-1.0), None) => -rhs,
            (None, Some(-1.0)) => -self,
            _ => Expr::Mul(Box::new(self), Box::new(rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }
}

impl Add<f64> for Expr {
    type Output = Expr;
    fn add(self, rhs: f64) -> Expr {
        self + Expr::Const(rhs)
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        self * Expr::Const(rhs)
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Const(self) * rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_keeps_trees_small() {
        let e = Expr::var(0) * 0.0 + Expr::c(2.0) * Expr::c(3.0);
        assert_eq!(e, Expr::Const(6.0));
        assert_eq!(-(-Expr::var(1)), Expr::var(1));
        assert_eq!(Expr::var(2) * 1.0, Expr::var(2));
    }

    #[test]
    fn derivative_of_trig_product() {
        // d/dx [x² sin(y)] = 2x sin(y); d/dy = x² cos(y)
        let e = Expr::var(0) * Expr::var(0) * Expr::var(1).sin();
        let p = [1.3, 0.4];
        let dx = e.diff(0).eval(&p);
        let dy = e.diff(1).eval(&p);
        assert!((dx - 2.0 * 1.3 * libm::sin(0.4)).abs() < 1e-15);
        assert!((dy - 1.69 * libm::cos(0.4)).abs() < 1e-15);
    }

    #[test]
    fn second_derivative_of_cosine() {
        let e = Expr::var(0).cos();
        let d2 = e.diff(0).diff(0);
        assert!((d2.eval(&[0.7]) + libm::cos(0.7)).abs() < 1e-15);
        assert_eq!(e.max_var(), Some(0));
        assert_eq!(Expr::c(1.0).max_var(), None);
    }
}
