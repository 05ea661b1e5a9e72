//! Fundamental solutions, explicit solutions and Martin quotients.
//!
//! Kernel values are carried as logarithms. A kernel that vanishes has
//! `log_value = −∞`; Martin quotients are differences of logarithms, which
//! keeps sequences with `k ~ 10⁴` in range.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::flows;
use crate::math;
use crate::models::OperatorModel;
use crate::point::Point;
use crate::quadrature;

/// Default finite-difference step of [`pde_residual`].
pub const DEFAULT_H: f64 = 1e-3;

/// Dilation factors probed by [`kernel_invariance_residual`].
pub const HOMOGENEITY_RADII: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

/// A nonnegative kernel value stored as its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    /// `ln Γ`, or `−∞` where `Γ = 0`.
    pub log_value: f64,
}

impl KernelValue {
    /// The zero value.
    pub const ZERO: KernelValue = KernelValue { log_value: f64::NEG_INFINITY };

    /// `Γ` itself.
    pub fn value(&self) -> f64 {
        if self.log_value == f64::NEG_INFINITY {
            0.0
        } else {
            math::exp(self.log_value)
        }
    }

    /// True for the exact zero.
    pub fn is_zero(&self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }
}

fn check_dim(z: &Point, n: usize) -> Result<()> {
    if z.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.dim() });
    }
    Ok(())
}

/// Kolmogorov fundamental solution on `R^{2m} × R`, with `z = (x, y, t)` and
/// `ζ = (ξ, η, τ)`:
///
/// ```text
/// Γ(z, ζ) = (3/2π)^{m/2} T^{−2m} exp(−|x−ξ|²/(4T) − 3|y−η+T(x+ξ)/2|²/T³),  T = t − τ > 0
/// ```
///
/// and `Γ = 0` for `t ≤ τ`. The prefactor gives total mass `(2π)^{m/2}`.
pub fn kolmogorov_kernel(m: usize, z: &Point, zeta: &Point) -> Result<KernelValue> {
    if m == 0 {
        return Err(Error::InvalidArgument("kolmogorov kernel needs m ≥ 1".into()));
    }
    check_dim(z, 2 * m)?;
    check_dim(zeta, 2 * m)?;
    let t = z.time - zeta.time;
    if !(t > 0.0) {
        return Ok(KernelValue::ZERO);
    }
    let (x, y) = z.spatial.split_at(m);
    let (xi, eta) = zeta.spatial.split_at(m);
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for j in 0..m {
        let dx = x[j] - xi[j];
        let dy = y[j] - eta[j] + 0.5 * t * (x[j] + xi[j]);
        q1 += dx * dx;
        q2 += dy * dy;
    }
    let mf = m as f64;
    let log_value =
        0.5 * mf * math::ln(3.0 / (2.0 * PI)) - 2.0 * mf * math::ln(t) - q1 / (4.0 * t) - 3.0 * q2 / (t * t * t);
    Ok(KernelValue { log_value })
}

/// Gaussian kernel of `∂_t − Δ` on `R^n`, unit mass.
pub fn heat_kernel(n: usize, z: &Point, zeta: &Point) -> Result<KernelValue> {
    if n == 0 {
        return Err(Error::InvalidArgument("heat kernel needs n ≥ 1".into()));
    }
    check_dim(z, n)?;
    check_dim(zeta, n)?;
    let t = z.time - zeta.time;
    if !(t > 0.0) {
        return Ok(KernelValue::ZERO);
    }
    let d2: f64 = z.spatial.iter().zip(&zeta.spatial).map(|(a, b)| (a - b) * (a - b)).sum();
    let log_value = -0.5 * n as f64 * math::ln(4.0 * PI * t) - d2 / (4.0 * t);
    Ok(KernelValue { log_value })
}

/// Minimal solution `exp(λ² e^{2t} − √2 λ x e^t)` of the one-dimensional
/// Ornstein–Uhlenbeck operator `∂_t − ∂_x² − x ∂_x`.
pub fn ou_minimal(lambda: f64, x: f64, t: f64) -> f64 {
    let e = math::exp(t);
    math::exp(lambda * lambda * e * e - core::f64::consts::SQRT_2 * lambda * x * e)
}

/// `𝓛u(z) = ∂_t u − Σ X_j² u − X_0 u` by finite differences of step `h`.
///
/// `X_j² u` is the second difference along the RK4 flow of `X_j`;
/// `∂_t u` and `X_0 u` are central differences.
pub fn pde_residual<U>(model: &OperatorModel, u: U, z: &Point, h: f64) -> Result<f64>
where
    U: Fn(&Point) -> f64,
{
    model.check_point(z)?;
    if !(h > 0.0) {
        return Err(Error::NonPositive { what: "h", value: h });
    }
    let p = z.to_vec();
    let f = |q: &[f64]| u(&Point::from_slice(q));
    let u0 = f(&p);
    let mut acc = 0.0;
    for j in 0..model.m() {
        acc -= second_along(&model.generator_spacetime(j), &f, &p, u0, h);
    }
    acc -= model.drift_x0().extended(0.0).apply(f, &p, h);
    acc += VectorField::coordinate(p.len(), p.len() - 1).apply(f, &p, h);
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::NonFinite { at: z.time })
    }
}

fn second_along<F: Fn(&[f64]) -> f64>(field: &VectorField, f: &F, p: &[f64], fp: f64, h: f64) -> f64 {
    let fwd = flows::flow_spacetime(field, h, p, 1);
    let bwd = flows::flow_spacetime(field, -h, p, 1);
    (f(&fwd) - 2.0 * fp + f(&bwd)) / (h * h)
}

/// Stationary residual `Σ X_j² v + X_0 v + λ v` at `x`. It vanishes when
/// `e^{−λt} v(x)` solves `𝓛u = 0`.
pub fn stationary_residual<V>(model: &OperatorModel, v: V, lambda: f64, x: &[f64], h: f64) -> Result<f64>
where
    V: Fn(&[f64]) -> f64,
{
    if x.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: x.len() });
    }
    let v0 = v(x);
    let mut acc = lambda * v0 + model.drift_x0().apply(&v, x, h);
    for g in model.generators() {
        acc += second_along(g, &v, x, v0, h);
    }
    if acc.is_finite() {
        Ok(acc)
    } else {
        Err(Error::NonFinite { at: 0.0 })
    }
}

fn rel_gap(a: KernelValue, b: KernelValue) -> f64 {
    math::abs(math::exp(a.log_value - b.log_value) - 1.0)
}

/// Largest of `|Γ(g∘z, g∘ζ)/Γ(z, ζ) − 1|` and `|r^{4m} Γ(δ_r z, δ_r ζ)/Γ(z, ζ) − 1|`
/// over [`HOMOGENEITY_RADII`].
pub fn kernel_invariance_residual(m: usize, g: &Point, z: &Point, zeta: &Point) -> Result<f64> {
    if !(z.time > zeta.time) {
        return Err(Error::InvalidArgument("kernel invariance needs t > τ".into()));
    }
    let model = OperatorModel::kolmogorov(m);
    let law = model.law();
    let dil = model.dilation().expect("kolmogorov is homogeneous");
    let base = kolmogorov_kernel(m, z, zeta)?;
    let moved = kolmogorov_kernel(m, &law.compose(g, z)?, &law.compose(g, zeta)?)?;
    let mut worst = rel_gap(moved, base);
    for r in HOMOGENEITY_RADII {
        let scaled = kolmogorov_kernel(m, &dil.apply(r, z)?, &dil.apply(r, zeta)?)?;
        let rescaled = KernelValue { log_value: scaled.log_value + 4.0 * m as f64 * math::ln(r) };
        worst = worst.max(rel_gap(rescaled, base));
    }
    Ok(worst)
}

/// `∫∫ Γ((x, y, τ + T), (0, 0, τ)) dx dy` for `m = 1`, by nested adaptive
/// Simpson on a sheared band of twelve standard deviations.
pub fn kolmogorov_mass(t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositive { what: "t", value: t });
    }
    let sx = 12.0 * math::sqrt(2.0 * t);
    let sy = 12.0 * math::sqrt(t * t * t / 6.0);
    let origin = Point::origin(2);
    let f = |x: f64, y: f64| {
        kolmogorov_kernel(1, &Point::new(alloc::vec![x, y], t), &origin).map(|k| k.value()).unwrap_or(f64::NAN)
    };
    Ok(quadrature::simpson_2d(f, -sx, sx, |x| (-0.5 * t * x - sy, -0.5 * t * x + sy), tol))
}

type TermFn = dyn Fn(usize) -> (Vec<f64>, Vec<f64>, f64) + Send + Sync;

/// The pole sequences `k ↦ (ξ_k, η_k, τ_k)`.
#[derive(Clone)]
pub enum MartinFamily {
    /// `(2k w1, k² w2, −k)`; the quotients tend to `exp(⟨x,v⟩ + t|v|²)` with `v = 3w2 − 2w1`.
    Exponential {
        /// Direction of `ξ_k`.
        w1: Vec<f64>,
        /// Direction of `η_k`.
        w2: Vec<f64>,
    },
    /// `(k w, 0, −1)`; the quotients tend to 0.
    ZeroLimit {
        /// Direction of `ξ_k`.
        w: Vec<f64>,
    },
    /// `(k ξ, k η, τ̃ − 1/k)`; bounded pole times.
    BoundedTau {
        /// Direction of `ξ_k`.
        xi: Vec<f64>,
        /// Direction of `η_k`.
        eta: Vec<f64>,
        /// Limit `τ̃` of the pole times.
        tau_limit: f64,
    },
    /// Arbitrary sequence.
    Custom(Arc<TermFn>),
}

impl fmt::Debug for MartinFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MartinFamily::Exponential { w1, w2 } => {
                f.debug_struct("Exponential").field("w1", w1).field("w2", w2).finish()
            }
            MartinFamily::ZeroLimit { w } => f.debug_struct("ZeroLimit").field("w", w).finish(),
            MartinFamily::BoundedTau { xi, eta, tau_limit } => {
                f.debug_struct("BoundedTau").field("xi", xi).field("eta", eta).field("tau_limit", tau_limit).finish()
            }
            MartinFamily::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A pole sequence together with the normalisation point `(0, 0, T)`.
#[derive(Debug, Clone)]
pub struct MartinSequence {
    /// Block size `m`.
    pub m: usize,
    /// Pole sequence.
    pub family: MartinFamily,
    /// Normalisation time `T`.
    pub base_time: f64,
}

impl MartinSequence {
    /// Validates the family's vector lengths against `m`.
    pub fn new(m: usize, family: MartinFamily, base_time: f64) -> Result<Self> {
        let lens: Vec<usize> = match &family {
            MartinFamily::Exponential { w1, w2 } => alloc::vec![w1.len(), w2.len()],
            MartinFamily::ZeroLimit { w } => alloc::vec![w.len()],
            MartinFamily::BoundedTau { xi, eta, .. } => alloc::vec![xi.len(), eta.len()],
            MartinFamily::Custom(_) => alloc::vec![],
        };
        if m == 0 {
            return Err(Error::InvalidArgument("m must be ≥ 1".into()));
        }
        if let Some(&bad) = lens.iter().find(|&&l| l != m) {
            return Err(Error::DimensionMismatch { expected: m, found: bad });
        }
        if !base_time.is_finite() {
            return Err(Error::InvalidArgument("T must be finite".into()));
        }
        Ok(Self { m, family, base_time })
    }

    /// `(ξ_k, η_k, τ_k)` for `k ≥ 1`.
    pub fn term(&self, k: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let kf = k as f64;
        let scale = |v: &[f64], c: f64| v.iter().map(|x| c * x).collect::<Vec<f64>>();
        match &self.family {
            MartinFamily::Exponential { w1, w2 } => (scale(w1, 2.0 * kf), scale(w2, kf * kf), -kf),
            MartinFamily::ZeroLimit { w } => (scale(w, kf), alloc::vec![0.0; self.m], -1.0),
            MartinFamily::BoundedTau { xi, eta, tau_limit } => (scale(xi, kf), scale(eta, kf), tau_limit - 1.0 / kf),
            MartinFamily::Custom(f) => f(k),
        }
    }

    /// The pole `ζ_k` as a point.
    pub fn pole(&self, k: usize) -> Point {
        let (mut xi, eta, tau) = self.term(k);
        xi.extend(eta);
        Point::new(xi, tau)
    }
}

/// `u_k(z) = Γ(z, ζ_k) / Γ((0, 0, T), ζ_k)`, evaluated in log-space.
pub fn martin_quotient(seq: &MartinSequence, k: usize, z: &Point) -> Result<f64> {
    let pole = seq.pole(k);
    check_dim(&pole, 2 * seq.m)?;
    if !(pole.time < seq.base_time) {
        return Err(Error::DegenerateSequence { tau: pole.time, base_time: seq.base_time });
    }
    let num = kolmogorov_kernel(seq.m, z, &pole)?;
    let den = kolmogorov_kernel(seq.m, &Point::new(alloc::vec![0.0; 2 * seq.m], seq.base_time), &pole)?;
    if num.is_zero() {
        return Ok(0.0);
    }
    Ok(math::exp(num.log_value - den.log_value))
}

/// The limit `(x, y, t) ↦ exp(⟨x, v⟩ + t|v|²)`, independent of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartinLimit {
    /// Exponent direction `v`.
    pub v: Vec<f64>,
}

impl MartinLimit {
    /// Evaluates at `z = (x, y, t)`; only the first `m` spatial entries are read.
    pub fn eval(&self, z: &Point) -> f64 {
        let m = self.v.len();
        math::exp(math::dot(&z.spatial[..m], &self.v) + z.time * math::norm_sq(&self.v))
    }
}

/// Predicted limit of the `(2k w1, k² w2, −k)` quotients: `v = 3w2 − 2w1`.
pub fn martin_limit_predicted(w1: &[f64], w2: &[f64]) -> Result<MartinLimit> {
    if w1.len() != w2.len() {
        return Err(Error::DimensionMismatch { expected: w1.len(), found: w2.len() });
    }
    Ok(MartinLimit { v: w1.iter().zip(w2).map(|(a, b)| 3.0 * b - 2.0 * a).collect() })
}

/// Normalised pole data of one term.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTerm {
    /// `ξ_k / (−τ_k)`.
    pub xi: Vec<f64>,
    /// `η_k / τ_k²`.
    pub eta: Vec<f64>,
    /// `3η̃ − ξ̃`, the direction of the limit.
    pub predictor: Vec<f64>,
}

/// Normalises term `k`; requires `τ_k < 0`.
pub fn normalized_sequence(seq: &MartinSequence, k: usize) -> Result<NormalizedTerm> {
    let (xi, eta, tau) = seq.term(k);
    if !(tau < 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("normalisation needs τ_k < 0, got {tau}")));
    }
    let xi: Vec<f64> = xi.iter().map(|v| v / -tau).collect();
    let eta: Vec<f64> = eta.iter().map(|v| v / (tau * tau)).collect();
    let predictor = xi.iter().zip(&eta).map(|(a, b)| 3.0 * b - a).collect();
    Ok(NormalizedTerm { xi, eta, predictor })
}

/// Least-squares slope of `ln err` against `ln k`; about `−1` for the
/// exponential family.
pub fn convergence_rate(ks: &[usize], errors: &[f64]) -> Option<f64> {
    if ks.len() != errors.len() || ks.len() < 2 || errors.iter().any(|e| !(*e > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = ks.iter().map(|k| math::ln(*k as f64)).collect();
    let ys: Vec<f64> = errors.iter().map(|e| math::ln(*e)).collect();
    Some(crate::linalg::slope(&xs, &ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn kernel_peak_and_zero_region() {
        let k = kolmogorov_kernel(1, &Point::new(vec![0.0, 0.0], 1.0), &Point::origin(2)).unwrap();
        assert!((k.value() - (3.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
        let z = kolmogorov_kernel(1, &Point::new(vec![0.3, 0.1], -0.5), &Point::origin(2)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.value(), 0.0);
        let h = heat_kernel(1, &Point::new(vec![2.0], 1.0), &Point::new(vec![2.0], 0.0)).unwrap();
        assert!((h.value() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ou_examples() {
        assert_eq!(ou_minimal(0.0, 3.0, -2.0), 1.0);
        assert!((ou_minimal(1.0, 0.0, 0.0) - core::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn predicted_limits() {
        let lim = martin_limit_predicted(&[0.0], &[0.0]).unwrap();
        assert_eq!(lim.eval(&Point::new(vec![3.0, 4.0], 5.0)), 1.0);
        let lim = martin_limit_predicted(&[0.25, -1.0], &[0.25, -1.0]).unwrap();
        assert_eq!(lim.v, vec![0.25, -1.0]);
    }

    #[test]
    fn normalization_examples() {
        let seq = MartinSequence::new(1, MartinFamily::Exponential { w1: vec![0.1], w2: vec![0.2] }, 0.0).unwrap();
        for k in [1, 7, 1000] {
            let n = normalized_sequence(&seq, k).unwrap();
            assert!((n.xi[0] - 0.2).abs() < 1e-15 && (n.eta[0] - 0.2).abs() < 1e-15);
            assert!((n.predictor[0] - 0.4).abs() < 1e-12);
        }
        let zero = MartinSequence::new(1, MartinFamily::ZeroLimit { w: vec![1.0] }, 0.0).unwrap();
        assert_eq!(normalized_sequence(&zero, 50).unwrap().predictor, vec![-50.0]);
        let bad =
            MartinSequence::new(1, MartinFamily::BoundedTau { xi: vec![1.0], eta: vec![0.0], tau_limit: 2.0 }, 3.0)
                .unwrap();
        assert!(normalized_sequence(&bad, 1).is_err());
    }

    #[test]
    fn quotient_normalization_and_degeneracy() {
        let seq =
            MartinSequence::new(1, MartinFamily::Exponential { w1: vec![0.0], w2: vec![1.0 / 3.0] }, 0.0).unwrap();
        for k in [1, 10, 10_000] {
            let u = martin_quotient(&seq, k, &Point::new(vec![0.0, 0.0], 0.0)).unwrap();
            assert!((u - 1.0).abs() < 1e-12);
        }
        let deg = MartinSequence::new(1, MartinFamily::ZeroLimit { w: vec![1.0] }, -2.0).unwrap();
        assert!(matches!(martin_quotient(&deg, 3, &Point::origin(2)), Err(Error::DegenerateSequence { .. })));
        assert!(MartinSequence::new(2, MartinFamily::ZeroLimit { w: vec![1.0] }, 0.0).is_err());
    }

    #[test]
    fn constant_has_zero_residual() {
        let kol = OperatorModel::kolmogorov(1);
        let r = pde_residual(&kol, |_| 2.5, &Point::new(vec![0.1, 0.2], 0.3), DEFAULT_H).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn rate_of_inverse_sequence() {
        let r = convergence_rate(&[100, 1000, 10000], &[1e-2, 1e-3, 1e-4]).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        assert!(convergence_rate(&[1], &[1.0]).is_none());
    }
}
