//! Seeded Monte Carlo experiment harness.
//!
//! Every experiment consumes an [`ExperimentConfig`] and produces an
//! [`ExperimentReport`] that is byte-reproducible from the config alone:
//! trials are keyed by index, realizations by `seed + trial`, and all
//! reductions run in index order regardless of the worker thread count.

pub mod adjoint;
pub mod config;
pub mod fubini;
pub mod hoeffding;
pub mod martingale;
pub mod maximal;
pub mod net_sup;
pub mod phi;
pub mod salem;
pub mod sampling;
pub mod stats;
pub mod stepcdf;
pub mod tail;

pub use config::{ExperimentConfig, ExperimentReport, LevelStats, SlopeFit, Verdict};
pub use tail::tail_experiment;
