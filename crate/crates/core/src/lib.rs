//! Low-discrepancy point sets in the unit cube.
//!
//! The crate covers three things:
//!
//! * classical quasi-Monte Carlo constructions ([`generators`]),
//! * exact uniformity measures: Warnock's closed-form L2 discrepancy, exact
//!   star discrepancy over the critical grid, local discrepancy fields and
//!   projection-averaged (Hickernell-type) objectives ([`discrepancy`]),
//! * Message-Passing Monte Carlo: a small graph neural network that maps input
//!   points to new points and is trained against the L2 objectives
//!   ([`autodiff`], [`gnn`], [`trainer`]).
//!
//! [`finance`] provides an Asian call option integrand for judging point sets
//! on a real 32-dimensional integral.
//!
//! Point sets, generators, discrepancy kernels and the option harness are
//! generic over the scalar type ([`Scalar`], implemented for `f32` and `f64`).
//! The network and its training loop run in `f64` only.

pub mod autodiff;
pub mod discrepancy;
mod error;
pub mod finance;
pub mod generators;
pub mod gnn;
pub mod points;
mod scalar;
pub mod seed;
mod sum;
pub mod trainer;

pub use error::{Error, Result};
pub use points::{PointSet, ProjectionIndexSet};
pub use scalar::Scalar;

/// Double-precision point set, the default currency of the crate.
pub type PointSet64 = PointSet<f64>;
/// Single-precision point set.
pub type PointSet32 = PointSet<f32>;
/// Double-precision Asian option configuration.
pub type AsianOption64 = finance::AsianOptionConfig<f64>;
