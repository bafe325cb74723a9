//! Fault-discovery curves for automated random testing.
//!
//! The crate covers the whole analysis pipeline:
//!
//! - [`harness`]: a small pool-based random tester over contract-equipped
//!   data structures, producing failure-event logs;
//! - [`collector`]: the coupon-collector model of random testing, exact and
//!   simulated;
//! - [`curves`]: counting curves, mean/median aggregation and per-subject
//!   summary statistics;
//! - [`models`]: the catalogue of growth models (rational, logarithmic,
//!   poly-logarithmic, exponential and polynomial forms);
//! - [`fitting`]: damped Gauss-Newton (Levenberg-Marquardt) fitting with
//!   multi-start initialization, goodness of fit and model ranking;
//! - [`stats`]: the Wilcoxon signed-rank test and Z-based effect sizes.
//!
//! Data-parallel loops (Monte Carlo runs, fit starts, testing sessions) run
//! on rayon when the `parallel` feature is enabled (the default) and
//! sequentially otherwise. Results are identical either way.

pub mod collector;
pub mod curves;
mod error;
pub mod fitting;
pub mod harness;
pub mod models;
pub mod par;
pub mod stats;

pub use error::{Error, Result};
