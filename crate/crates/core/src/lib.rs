//! Simulation and verification laboratory for random Cantor maximal
//! operators.
//!
//! The crate builds Ahlfors-regular random Cantor measures on dyadic grids,
//! integrates their self-products along lines exactly, evaluates the
//! exponent calculus of the associated maximal-operator bounds, and drives
//! seeded Monte Carlo experiments that probe the probabilistic tail
//! estimates behind them. The `cml` binary exposes the whole lab on the
//! command line.

pub mod analysis;
pub mod cli;
pub mod construction;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod rng;
pub mod scalar;

pub use construction::{BranchingSchedule, Realization};
pub use dyadic::{DyadicInterval, StepFunction};
pub use error::{Error, Result};
pub use geometry::LineParams;
pub use scalar::{DyadicRat, Scalar};
