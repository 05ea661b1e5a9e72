//! Explicit finite differences for the Cauchy problem, and extremal solutions.
//!
//! Supported: `heat(1)`, `heat(2)`, `kolmogorov(1)` and `grushin`. Second
//! order terms use centred differences (the Grushin coefficient `x²` taken at
//! the node); the Kolmogorov transport term `x ∂_y` is first-order upwind and
//! switches direction at `x = 0`.
//!
//! Edges of a diffused axis are Dirichlet nodes. The `y` axis of the
//! Kolmogorov operator carries transport only, so its edges are updated by
//! the scheme: the outflow edge needs no exterior value and the inflow edge
//! takes a zero `y`-gradient.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::models::{ModelKind, OperatorModel};
use crate::point::Point;

/// One uniform axis of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    /// First node.
    pub min: f64,
    /// Last node.
    pub max: f64,
    /// Number of nodes, at least 3.
    pub points: usize,
}

impl Axis {
    /// Validated axis.
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidArgument(alloc::format!("an axis needs at least 3 points, got {points}")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidArgument(alloc::format!("invalid axis range [{min}, {max}]")));
        }
        Ok(Self { min, max, points })
    }

    /// Node spacing.
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    /// Coordinate of node `i`.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }
}

/// Node values on a box, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    /// Axes, one per spatial coordinate.
    pub axes: Vec<Axis>,
    /// Node values.
    pub values: Vec<f64>,
    /// Time stamp.
    pub time: f64,
}

impl GridField {
    /// Checks value count and finiteness.
    pub fn new(axes: Vec<Axis>, values: Vec<f64>, time: f64) -> Result<Self> {
        let count: usize = axes.iter().map(|a| a.points).product();
        if axes.is_empty() || values.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid values must be finite".into()));
        }
        Ok(Self { axes, values, time })
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(axes: Vec<Axis>, time: f64, f: F) -> Result<Self> {
        let count: usize = axes.iter().map(|a| a.points).product();
        let mut values = Vec::with_capacity(count);
        let mut x = vec![0.0; axes.len()];
        for flat in 0..count {
            Self::fill_coords(&axes, flat, &mut x);
            values.push(f(&x));
        }
        Self::new(axes, values, time)
    }

    fn fill_coords(axes: &[Axis], flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for a in (0..axes.len()).rev() {
            out[a] = axes[a].coord(rest % axes[a].points);
            rest /= axes[a].points;
        }
    }

    /// Number of axes.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True for a grid without nodes (never produced by the constructors).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Per-axis node index of a flat index.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        let mut rest = flat;
        for a in (0..self.dim()).rev() {
            idx[a] = rest % self.axes[a].points;
            rest /= self.axes[a].points;
        }
        idx
    }

    /// Coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        Self::fill_coords(&self.axes, flat, &mut x);
        x
    }

    /// Flat offset between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.points).product()
    }

    /// Flat indices of nodes at least `margin` away from every face.
    pub fn interior(&self, margin: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let x = self.coords(i);
                x.iter().zip(&self.axes).all(|(v, a)| *v >= a.min + margin && *v <= a.max - margin)
            })
            .collect()
    }

    /// Smallest node value.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest node value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

type TraceFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// Values imposed on Dirichlet nodes.
#[derive(Clone, Default)]
pub enum Boundary {
    /// The initial values, held fixed.
    #[default]
    Frozen,
    /// `g(x, t)` evaluated at the new time level.
    Trace(Arc<TraceFn>),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Frozen => f.write_str("Frozen"),
            Boundary::Trace(_) => f.write_str("Trace"),
        }
    }
}

impl Boundary {
    /// Trace from a closure.
    pub fn trace<G: Fn(&[f64], f64) -> f64 + Send + Sync + 'static>(g: G) -> Self {
        Boundary::Trace(Arc::new(g))
    }
}

/// Solver options.
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Dirichlet data.
    pub boundary: Boundary,
    /// Keep a copy every this many steps (plus the initial and final fields).
    pub record_every: Option<usize>,
}

/// Final field plus recorded snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Field after the last step.
    pub field: GridField,
    /// Recorded fields in time order; empty unless requested.
    pub snapshots: Vec<GridField>,
}

#[derive(Clone, Copy)]
enum Coeff {
    One,
    X,
    XSquared,
}

impl Coeff {
    fn at(self, x: &[f64]) -> f64 {
        match self {
            Coeff::One => 1.0,
            Coeff::X => x[0],
            Coeff::XSquared => x[0] * x[0],
        }
    }
}

struct Scheme {
    diffusion: Vec<(usize, Coeff)>,
    transport: Vec<(usize, Coeff)>,
}

fn scheme(model: &OperatorModel) -> Result<Scheme> {
    let unsupported = || Error::Unsupported { op: "finite-difference solve", model: model.name().into() };
    match model.kind() {
        ModelKind::Heat if model.n() <= 2 => {
            Ok(Scheme { diffusion: (0..model.n()).map(|a| (a, Coeff::One)).collect(), transport: vec![] })
        }
        ModelKind::Kolmogorov if model.n() == 2 => {
            Ok(Scheme { diffusion: vec![(0, Coeff::One)], transport: vec![(1, Coeff::X)] })
        }
        ModelKind::Grushin => Ok(Scheme { diffusion: vec![(0, Coeff::One), (1, Coeff::XSquared)], transport: vec![] }),
        _ => Err(unsupported()),
    }
}

/// Largest stable time step for `model` on the grid of `u0`:
/// `0.25·h²/max|c|` per diffused axis and `0.5·h/max|b|` per transported axis.
pub fn cfl_bound(model: &OperatorModel, u0: &GridField) -> Result<f64> {
    let sch = scheme(model)?;
    if u0.dim() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: u0.dim() });
    }
    let max_coeff = |c: Coeff| (0..u0.len()).map(|i| math::abs(c.at(&u0.coords(i)))).fold(0.0, f64::max);
    let mut bound = f64::INFINITY;
    for &(a, c) in &sch.diffusion {
        let h = u0.axes[a].spacing();
        let k = max_coeff(c);
        if k > 0.0 {
            bound = bound.min(0.25 * h * h / k);
        }
    }
    for &(a, c) in &sch.transport {
        let k = max_coeff(c);
        if k > 0.0 {
            bound = bound.min(0.5 * u0.axes[a].spacing() / k);
        }
    }
    Ok(bound)
}

/// [`solve_cauchy_with`] with frozen Dirichlet data.
pub fn solve_cauchy(model: &OperatorModel, u0: &GridField, dt: f64, steps: usize) -> Result<GridField> {
    Ok(solve_cauchy_with(model, u0, dt, steps, &SolveOptions::default())?.field)
}

/// Explicit time stepping of `∂_t u = Σ X_j² u + X_0 u` from `u0`.
pub fn solve_cauchy_with(
    model: &OperatorModel,
    u0: &GridField,
    dt: f64,
    steps: usize,
    options: &SolveOptions,
) -> Result<Solution> {
    let sch = scheme(model)?;
    if !(dt > 0.0) {
        return Err(Error::NonPositive { what: "dt", value: dt });
    }
    let bound = cfl_bound(model, u0)?;
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, bound });
    }
    let n = u0.len();
    let coords: Vec<Vec<f64>> = (0..n).map(|i| u0.coords(i)).collect();
    let index: Vec<Vec<usize>> = (0..n).map(|i| u0.multi_index(i)).collect();
    let on_edge = |i: usize, a: usize| index[i][a] == 0 || index[i][a] + 1 == u0.axes[a].points;
    let dirichlet: Vec<bool> = (0..n).map(|i| sch.diffusion.iter().any(|&(a, _)| on_edge(i, a))).collect();

    let mut cur = u0.clone();
    let mut next = u0.values.clone();
    let mut snapshots = Vec::new();
    if options.record_every.is_some() {
        snapshots.push(cur.clone());
    }
    for step in 1..=steps {
        let t_new = u0.time + step as f64 * dt;
        let u = &cur.values;
        for i in 0..n {
            if dirichlet[i] {
                next[i] = match &options.boundary {
                    Boundary::Frozen => u0.values[i],
                    Boundary::Trace(g) => g(&coords[i], t_new),
                };
                continue;
            }
            let mut rate = 0.0;
            for &(a, c) in &sch.diffusion {
                let (s, h) = (u0.stride(a), u0.axes[a].spacing());
                rate += c.at(&coords[i]) * (u[i + s] - 2.0 * u[i] + u[i - s]) / (h * h);
            }
            for &(a, c) in &sch.transport {
                let (s, h) = (u0.stride(a), u0.axes[a].spacing());
                let b = c.at(&coords[i]);
                let j = index[i][a];
                if b > 0.0 && j + 1 < u0.axes[a].points {
                    rate += b * (u[i + s] - u[i]) / h;
                } else if b < 0.0 && j > 0 {
                    rate += b * (u[i] - u[i - s]) / h;
                }
            }
            next[i] = u[i] + dt * rate;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step });
        }
        core::mem::swap(&mut cur.values, &mut next);
        cur.time = t_new;
        if let Some(k) = options.record_every {
            if k > 0 && (step % k == 0 || step == steps) {
                snapshots.push(cur.clone());
            }
        }
    }
    Ok(Solution { field: cur, snapshots })
}

/// `max |u(…, y_{i+1}, …) − u(…, y_i, …)|` over neighbours along `axis`.
pub fn y_independence_deviation(field: &GridField, axis: usize) -> Result<f64> {
    if axis >= field.dim() {
        return Err(Error::IndexOutOfRange { index: axis, len: field.dim() });
    }
    let s = field.stride(axis);
    let last = field.axes[axis].points - 1;
    Ok((0..field.len())
        .filter(|&i| field.multi_index(i)[axis] < last)
        .map(|i| math::abs(field.values[i + s] - field.values[i]))
        .fold(0.0, f64::max))
}

/// `exp(⟨x, α⟩ + |α|² t)` with `α` on the generator coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalSolution {
    /// Exponent, length `N`.
    pub alpha: Vec<f64>,
}

impl ExtremalSolution {
    /// Value at a space-time point.
    pub fn eval(&self, z: &Point) -> f64 {
        math::exp(math::dot(&z.spatial, &self.alpha) + self.norm_sq() * z.time)
    }

    /// Stationary factor `exp(⟨x, α⟩)`.
    pub fn stationary(&self, x: &[f64]) -> f64 {
        math::exp(math::dot(x, &self.alpha))
    }

    /// `λ = −|α|²`, so that `eval = e^{−λt}·stationary`.
    pub fn lambda(&self) -> f64 {
        -self.norm_sq()
    }

    /// `|α|²`, the separation exponent.
    pub fn norm_sq(&self) -> f64 {
        math::norm_sq(&self.alpha)
    }

    /// Catalog bound on the generalised principal eigenvalue: `λ_0 = 0`.
    pub fn principal_eigenvalue_bound(&self) -> f64 {
        0.0
    }
}

/// Coordinates on which an extremal exponent may be supported.
pub fn extremal_support(model: &OperatorModel) -> Result<Vec<usize>> {
    match model.kind() {
        ModelKind::Heat | ModelKind::HeisenbergHeat | ModelKind::Kolmogorov => Ok((0..model.m()).collect()),
        _ => Err(Error::Unsupported { op: "extremal catalog", model: model.name().into() }),
    }
}

/// The extremal solution with exponent `α`.
pub fn extremal(model: &OperatorModel, alpha: &[f64]) -> Result<ExtremalSolution> {
    let support = extremal_support(model)?;
    if alpha.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: alpha.len() });
    }
    if let Some(j) = (0..alpha.len()).find(|j| alpha[*j] != 0.0 && !support.contains(j)) {
        return Err(Error::InvalidArgument(alloc::format!(
            "α_{j} = {} lies outside the generator coordinates",
            alpha[j]
        )));
    }
    Ok(ExtremalSolution { alpha: alpha.to_vec() })
}

/// `v(x) = Σ_i w_i exp(√(−λ) ⟨x, ξ_i⟩)` with unit directions `ξ_i` on the
/// generator coordinates; solves the stationary equation with eigenvalue `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMixture {
    /// `(weight, direction)` pairs; weights sum to 1.
    pub atoms: Vec<(f64, Vec<f64>)>,
    /// Eigenvalue `λ ≤ 0`.
    pub lambda: f64,
}

impl StationaryMixture {
    /// Normalises weights and directions.
    pub fn new(model: &OperatorModel, lambda: f64, atoms: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let support = extremal_support(model)?;
        if lambda > 0.0 {
            return Err(Error::InvalidArgument("λ must be ≤ 0".into()));
        }
        let total: f64 = atoms.iter().map(|(w, _)| *w).sum();
        if atoms.is_empty() || atoms.iter().any(|(w, _)| !(*w >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidArgument("weights must be nonnegative with positive sum".into()));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (w, xi) in atoms {
            if xi.len() != support.len() {
                return Err(Error::DimensionMismatch { expected: support.len(), found: xi.len() });
            }
            let norm = math::sqrt(math::norm_sq(&xi));
            if !(norm > 0.0) {
                return Err(Error::InvalidArgument("directions must be nonzero".into()));
            }
            let mut full = vec![0.0; model.n()];
            for (k, &j) in support.iter().enumerate() {
                full[j] = xi[k] / norm;
            }
            out.push((w / total, full));
        }
        Ok(Self { atoms: out, lambda })
    }

    /// `v(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = math::sqrt(-self.lambda);
        self.atoms.iter().map(|(w, xi)| w * math::exp(r * math::dot(x, xi))).sum()
    }
}

/// Fitted growth rate of `ln u(0, t)` against `t` (least squares).
pub fn growth_rate(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(alloc::format!(
            "growth fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("sample times must increase".into()));
    }
    if samples.iter().any(|(_, u)| !(*u > 0.0)) {
        return Err(Error::Vanishing);
    }
    let ts: Vec<f64> = samples.iter().map(|(t, _)| *t).collect();
    let ls: Vec<f64> = samples.iter().map(|(_, u)| math::ln(*u)).collect();
    Ok(linalg::slope(&ts, &ls))
}

/// True when `u(0, t) e^{−εt}` stays bounded over the samples, judged by the
/// fitted exponential rate of [`growth_rate`] not exceeding `ε`.
pub fn liouville_growth_check(samples: &[(f64, f64)], eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::NonPositive { what: "eps", value: eps });
    }
    Ok(growth_rate(samples)? <= eps * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> Vec<Axis> {
        vec![Axis::new(-2.0, 2.0, n).unwrap(), Axis::new(-2.0, 2.0, n).unwrap()]
    }

    #[test]
    fn constants_are_preserved() {
        for model in [OperatorModel::heat(2), OperatorModel::kolmogorov(1), OperatorModel::grushin()] {
            let u0 = GridField::from_fn(square(11), 0.0, |_| 1.0).unwrap();
            let dt = cfl_bound(&model, &u0).unwrap();
            let u = solve_cauchy(&model, &u0, dt, 50).unwrap();
            assert!(u.values.iter().all(|v| *v == 1.0), "{}", model.name());
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let model = OperatorModel::kolmogorov(1);
        let u0 = GridField::from_fn(square(41), 0.0, |_| 1.0).unwrap();
        let bound = cfl_bound(&model, &u0).unwrap();
        assert!((bound - 0.25 * 0.01).abs() < 1e-15);
        assert!(matches!(solve_cauchy(&model, &u0, 2.0 * bound, 1), Err(Error::Cfl { .. })));
        assert!(matches!(solve_cauchy(&OperatorModel::mumford(), &u0, bound, 1), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn deviation_examples() {
        let axes = square(5);
        let f = GridField::from_fn(axes.clone(), 0.0, |x| x[1]).unwrap();
        assert!((y_independence_deviation(&f, 1).unwrap() - 1.0).abs() < 1e-15);
        let g = GridField::from_fn(axes, 0.0, |x| x[0]).unwrap();
        assert_eq!(y_independence_deviation(&g, 1).unwrap(), 0.0);
        assert!(y_independence_deviation(&g, 2).is_err());
    }

    #[test]
    fn extremal_support_is_checked() {
        let heis = OperatorModel::heisenberg_heat();
        assert!(extremal(&heis, &[1.0, 0.0, 0.0]).is_ok());
        assert!(extremal(&heis, &[0.0, 0.0, 1.0]).is_err());
        assert!(extremal(&OperatorModel::mumford(), &[0.0; 3]).is_err());
        let e = extremal(&OperatorModel::kolmogorov(1), &[0.5, 0.0]).unwrap();
        assert_eq!(e.lambda(), -0.25);
        assert_eq!(e.eval(&Point::origin(2)), 1.0);
    }

    #[test]
    fn liouville_examples() {
        let flat: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 1.0)).collect();
        assert!(liouville_growth_check(&flat, 1e-3).unwrap());
        let grow: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, libm::exp(2.0 * i as f64))).collect();
        assert!(!liouville_growth_check(&grow, 1.0).unwrap());
        assert!(liouville_growth_check(&flat[..2], 1.0).is_err());
    }

    #[test]
    fn mixture_is_normalized() {
        let heat = OperatorModel::heat(2);
        let mix = StationaryMixture::new(&heat, -1.0, vec![(2.0, vec![3.0, 4.0]), (2.0, vec![0.0, -1.0])]).unwrap();
        assert_eq!(mix.atoms[0], (0.5, vec![0.6, 0.8]));
        assert!((mix.eval(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
