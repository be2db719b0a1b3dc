//! Sub-coboundaries for expanding and zooming dynamical systems.
//!
//! Given a Hölder potential `phi` whose averages against every invariant
//! measure are nonnegative, [`ergodic`] builds a function `lambda` with
//! `phi >= lambda - lambda o f` from infima of Birkhoff sums over inverse
//! branch trees and verifies the inequality on map-compatible grids. The
//! remaining modules provide executable checks for the surrounding notions:
//! zooming contractions, hyperbolic times, bounded distortion, weighted
//! shift metrics and Collet-Eckmann type conditions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contractions;
pub mod dynamics;
pub mod ergodic;
pub mod error;
pub mod families;
pub mod symbolic;
pub mod zooming;

pub use error::{Error, Result};
