#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Executable models of hypoelliptic evolution operators
//!
//! ```text
//! L u = ∂_t u − Σ_j X_j² u − X_0 u      in R^{N+1}
//! ```
//!
//! The crate bundles, for a fixed catalog of operators (heat, Heisenberg heat,
//! Kolmogorov, Mumford, Cinti–Menozzi–Polidoro, Grushin and its lifting,
//! Ornstein–Uhlenbeck and a linked Heisenberg/Kolmogorov operator):
//!
//! - the Lie group laws and dilations leaving each operator invariant ([`groups`]),
//! - vector fields with symbolic Jacobians, Lie brackets and Hörmander rank ([`fields`], [`models`]),
//! - admissible paths, constant-control exponentials and flow loops ([`flows`]),
//! - attainable-set sampling and analytic membership oracles ([`reach`]),
//! - fundamental solutions, Martin quotients and their limits ([`kernels`]),
//! - extremal solutions and an explicit finite-difference Cauchy solver ([`solver`]).
//!
//! Everything is `no_std` with `alloc`; transcendental functions come from `libm`.

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod linalg;
mod math;

pub mod expr;
pub mod fields;
pub mod flows;
pub mod groups;
pub mod kernels;
pub mod models;
pub mod point;
pub mod quadrature;
pub mod reach;
pub mod solver;

pub use crate::error::{Error, Result};
pub use crate::expr::Expr;
pub use crate::fields::VectorField;
pub use crate::groups::{Dilation, GroupLaw, LayerStructure};
pub use crate::models::{ModelKind, OperatorModel};
pub use crate::point::Point;
