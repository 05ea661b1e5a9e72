//! Space-time points `z = (x, t)`.

use alloc::vec::Vec;

use crate::math;

/// A point of `R^{N+1}`: spatial coordinates plus an evolution time.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    /// Spatial coordinates `x ∈ R^N`.
    pub spatial: Vec<f64>,
    /// Time coordinate `t`.
    pub time: f64,
}

impl Point {
    /// Builds a point from its parts.
    pub fn new(spatial: Vec<f64>, time: f64) -> Self {
        Self { spatial, time }
    }

    /// The origin of `R^{n+1}`.
    pub fn origin(n: usize) -> Self {
        Self::new(alloc::vec![0.0; n], 0.0)
    }

    /// Splits a flat space-time vector; the last entry is the time.
    ///
    /// Panics on an empty slice.
    pub fn from_slice(v: &[f64]) -> Self {
        let (time, spatial) = v.split_last().expect("space-time vector is empty");
        Self::new(spatial.to_vec(), *time)
    }

    /// Spatial dimension `N`.
    pub fn dim(&self) -> usize {
        self.spatial.len()
    }

    /// Flattened `(x_1, …, x_N, t)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.spatial.len() + 1);
        v.extend_from_slice(&self.spatial);
        v.push(self.time);
        v
    }

    /// `‖self − other‖∞` over all N+1 coordinates.
    pub fn sup_distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.spatial
            .iter()
            .zip(&other.spatial)
            .map(|(a, b)| math::abs(a - b))
            .fold(math::abs(self.time - other.time), f64::max)
    }

    /// `‖self‖∞`.
    pub fn sup_norm(&self) -> f64 {
        math::sup_norm(&self.spatial).max(math::abs(self.time))
    }

    /// True when every coordinate is finite.
    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.spatial.iter().all(|c| c.is_finite())
    }

    /// Coordinate-wise sum (Euclidean translation).
    pub fn add(&self, other: &Point) -> Point {
        Point::new(self.spatial.iter().zip(&other.spatial).map(|(a, b)| a + b).collect(), self.time + other.time)
    }
}

impl From<(Vec<f64>, f64)> for Point {
    fn from((spatial, time): (Vec<f64>, f64)) -> Self {
        Self::new(spatial, time)
    }
}
