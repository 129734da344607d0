//! Two-scale asymptotics for one-dimensional Helmholtz scattering by a
//! rapidly oscillating, compactly supported potential `q(x, x / eps)`.
//!
//! The crate builds the formal expansion `psi ~ sum eps^n Psi_n(x, x / eps)`
//! from periodic cell problems and outgoing slow solves, and compares it
//! against a direct fine-grid solution of the oscillatory problem.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod error;
pub mod expansion;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod potential;
pub mod reference;
pub mod solver;

pub use error::{Error, Result};
