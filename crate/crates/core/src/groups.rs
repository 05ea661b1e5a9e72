//! Lie group laws on `R^{N+1}` and their dilation groups.
//!
//! Every law is written as `a ∘ b`, with `a` acting as the left translation.
//! Inverses are solved by hand per law; there is no generic numeric inverse.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::point::Point;

/// Default absolute tolerance for group identities on coordinates in `[-10, 10]`.
pub const GROUP_TOLERANCE: f64 = 1e-10;

/// The builtin group laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupLaw {
    /// Euclidean translations of `R^{n+1}`.
    Euclidean {
        /// Spatial dimension.
        n: usize,
    },
    /// Heisenberg group in the normalisation `ζ + z + (ξy − ηx)/2` under which
    /// `∂x − (y/2)∂z` and `∂y + (x/2)∂z` are left-invariant.
    Heisenberg,
    /// Heisenberg group with unit skew term `ζ + z + (ηx − ξy)`; its
    /// left-invariant fields are `∂x + y∂z` and `∂y − x∂z`.
    HeisenbergUnitSkew,
    /// Kolmogorov group `(ξ,η,τ)∘(x,y,t) = (x+ξ, y+η−tξ, t+τ)` on `R^{2m+1}`.
    Kolmogorov {
        /// Number of velocity variables.
        m: usize,
    },
    /// Roto-translation group of the Mumford operator.
    Mumford,
    /// Group of the Cinti–Menozzi–Polidoro operator.
    Cmp,
    /// Group of the lifted Grushin operator, coordinates `(x, y, w, t)`.
    GrushinLifted,
    /// `(y,s)∘(x,t) = (x + e^{−t}y, t + s)`, leaves the Ornstein–Uhlenbeck operator invariant.
    OrnsteinUhlenbeck {
        /// Spatial dimension.
        n: usize,
    },
    /// Link of the unit-skew Heisenberg group and the Kolmogorov group on
    /// coordinates `(x, y, s, w, t)`.
    Linked,
}

impl GroupLaw {
    /// Spatial dimension `N` of the points the law acts on.
    pub fn spatial_dim(&self) -> usize {
        match *self {
            GroupLaw::Euclidean { n } | GroupLaw::OrnsteinUhlenbeck { n } => n,
            GroupLaw::Heisenberg | GroupLaw::HeisenbergUnitSkew => 3,
            GroupLaw::Kolmogorov { m } => 2 * m,
            GroupLaw::Mumford | GroupLaw::Cmp | GroupLaw::GrushinLifted => 3,
            GroupLaw::Linked => 4,
        }
    }

    /// The neutral element (the origin for every builtin law).
    pub fn identity(&self) -> Point {
        Point::origin(self.spatial_dim())
    }

    fn check(&self, p: &Point) -> Result<()> {
        let n = self.spatial_dim();
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
        Ok(())
    }

    /// `a ∘ b`.
    pub fn compose(&self, a: &Point, b: &Point) -> Result<Point> {
        self.check(a)?;
        self.check(b)?;
        let (x, y) = (&a.spatial, &b.spatial);
        let t = a.time + b.time;
        let spatial = match *self {
            GroupLaw::Euclidean { .. } => x.iter().zip(y).map(|(p, q)| p + q).collect(),
            GroupLaw::Heisenberg => vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] + 0.5 * (x[0] * y[1] - x[1] * y[0])],
            GroupLaw::HeisenbergUnitSkew => vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] + (x[1] * y[0] - x[0] * y[1])],
            GroupLaw::Kolmogorov { m } => {
                let mut out = vec![0.0; 2 * m];
                for j in 0..m {
                    out[j] = y[j] + x[j];
                    out[m + j] = y[m + j] + x[m + j] - b.time * x[j];
                }
                out
            }
            GroupLaw::Mumford => {
                let (s, c) = (math::sin(x[0]), math::cos(x[0]));
                vec![x[0] + y[0], x[1] + y[1] * c - y[2] * s, x[2] + y[1] * s + y[2] * c]
            }
            GroupLaw::Cmp => {
                let tau = b.time;
                vec![x[0] + y[0], x[1] + y[1] + 2.0 * x[0] * y[2] - tau * x[0] * x[0], x[2] + y[2] - tau * x[0]]
            }
            GroupLaw::GrushinLifted => {
                vec![x[0] + y[0], x[1] + y[1] + x[0] * y[2], x[2] + y[2]]
            }
            GroupLaw::OrnsteinUhlenbeck { .. } => {
                let decay = math::exp(-b.time);
                y.iter().zip(x).map(|(q, p)| q + decay * p).collect()
            }
            GroupLaw::Linked => {
                vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] + (x[1] * y[0] - x[0] * y[1]), x[3] + y[3] - b.time * x[0]]
            }
        };
        Ok(Point::new(spatial, t))
    }

    /// Two-sided inverse of `a`.
    pub fn inverse(&self, a: &Point) -> Result<Point> {
        self.check(a)?;
        let x = &a.spatial;
        let t = a.time;
        let spatial = match *self {
            GroupLaw::Euclidean { .. } | GroupLaw::Heisenberg | GroupLaw::HeisenbergUnitSkew => {
                x.iter().map(|v| -v).collect()
            }
            GroupLaw::Kolmogorov { m } => {
                let mut out = vec![0.0; 2 * m];
                for j in 0..m {
                    out[j] = -x[j];
                    out[m + j] = -x[m + j] - t * x[j];
                }
                out
            }
            GroupLaw::Mumford => {
                let (s, c) = (math::sin(x[0]), math::cos(x[0]));
                vec![-x[0], -(x[1] * c + x[2] * s), x[1] * s - x[2] * c]
            }
            GroupLaw::Cmp => vec![-x[0], -x[1] + 2.0 * x[0] * x[2] + t * x[0] * x[0], -x[2] - t * x[0]],
            GroupLaw::GrushinLifted => vec![-x[0], -x[1] + x[0] * x[2], -x[2]],
            GroupLaw::OrnsteinUhlenbeck { .. } => {
                let grow = math::exp(t);
                x.iter().map(|v| -grow * v).collect()
            }
            GroupLaw::Linked => vec![-x[0], -x[1], -x[2], -x[3] - t * x[0]],
        };
        Ok(Point::new(spatial, -t))
    }

    /// `‖a∘(b∘c) − (a∘b)∘c‖∞`.
    pub fn associativity_residual(&self, a: &Point, b: &Point, c: &Point) -> Result<f64> {
        let left = self.compose(a, &self.compose(b, c)?)?;
        let right = self.compose(&self.compose(a, b)?, c)?;
        Ok(left.sup_distance(&right))
    }

    /// Largest of the identity and two-sided inverse residuals at `a`.
    pub fn inverse_residual(&self, a: &Point) -> Result<f64> {
        let e = self.identity();
        let inv = self.inverse(a)?;
        let r1 = self.compose(a, &inv)?.sup_distance(&e);
        let r2 = self.compose(&inv, a)?.sup_distance(&e);
        let r3 = self.compose(&e, a)?.sup_distance(a);
        let r4 = self.compose(a, &e)?.sup_distance(a);
        Ok(r1.max(r2).max(r3).max(r4))
    }
}

/// Free-function form of [`GroupLaw::compose`].
pub fn compose(law: &GroupLaw, a: &Point, b: &Point) -> Result<Point> {
    law.compose(a, b)
}

/// Free-function form of [`GroupLaw::inverse`].
pub fn inverse(law: &GroupLaw, a: &Point) -> Result<Point> {
    law.inverse(a)
}

/// Anisotropic dilation `δ_r`: coordinate `i` scales by `r^{exponents[i]}`,
/// spatial exponents first, the time exponent last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dilation {
    exponents: Vec<u32>,
}

impl Dilation {
    /// Builds a dilation; every exponent must be at least 1.
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.len() < 2 || exponents.contains(&0) {
            return Err(Error::InvalidArgument("dilation exponents must be >= 1 and cover space and time".into()));
        }
        Ok(Self { exponents })
    }

    /// Exponents, spatial then time.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Homogeneous dimension `Σ exponents`.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// `δ_r z`.
    pub fn apply(&self, r: f64, z: &Point) -> Result<Point> {
        if !(r > 0.0) {
            return Err(Error::NonPositive { what: "dilation factor", value: r });
        }
        let n = self.exponents.len() - 1;
        if z.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: z.dim() });
        }
        let spatial = z.spatial.iter().zip(&self.exponents).map(|(v, &e)| v * math::powi(r, e as i32)).collect();
        Ok(Point::new(spatial, z.time * math::powi(r, self.exponents[n] as i32)))
    }
}

/// Free-function form of [`Dilation::apply`].
pub fn dilate(dil: &Dilation, r: f64, z: &Point) -> Result<Point> {
    dil.apply(r, z)
}

/// `‖δ_r(a∘b) − δ_r a ∘ δ_r b‖∞`.
pub fn automorphism_residual(law: &GroupLaw, dil: &Dilation, r: f64, a: &Point, b: &Point) -> Result<f64> {
    let lhs = dil.apply(r, &law.compose(a, b)?)?;
    let rhs = law.compose(&dil.apply(r, a)?, &dil.apply(r, b)?)?;
    Ok(lhs.sup_distance(&rhs))
}

/// Stratification `R^N = R^m × R^{m_2} × ⋯` of a Carnot group, stored as the
/// coordinate indices of each layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerStructure {
    layers: Vec<Vec<usize>>,
}

impl LayerStructure {
    /// Validates that the layers partition `0..n`.
    pub fn new(layers: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in layers.iter().flatten() {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument("layers must partition the coordinates".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument("layers must partition the coordinates".into()));
        }
        Ok(Self { layers })
    }

    /// Layer sizes `m, m_2, …, m_n`.
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// Coordinate indices of layer `k` (0 = first layer).
    pub fn layer(&self, k: usize) -> &[usize] {
        &self.layers[k]
    }

    /// Number of layers (the step).
    pub fn step(&self) -> usize {
        self.layers.len()
    }

    /// Coordinates of the first layer.
    pub fn first(&self) -> &[usize] {
        &self.layers[0]
    }

    /// Coordinates of the last layer.
    pub fn last(&self) -> &[usize] {
        &self.layers[self.layers.len() - 1]
    }
}
