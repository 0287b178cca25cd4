//! perr-lab: a simulation laboratory and estimation library for the prior
//! event rate ratio (PERR) method on binary two-period outcomes.
//!
//! The crate has four parts:
//!
//! * [`dgp`] — a structural generator for two-period cohorts with selective
//!   post-period dropout, plus an exact 32-state enumeration of the
//!   population law that yields asymptotic (oracle) estimator values.
//! * [`estimators`] — the completer relative risk and the two PERR
//!   ratio-of-ratios estimators, with in-band failure markers and a
//!   percentile bootstrap.
//! * [`harness`] — the replicated experiment grid with deterministic
//!   per-replicate random streams (see [`stream`]) and worker-count-invariant
//!   aggregation.
//! * [`config`] / [`cohort_csv`] / [`results_csv`] / [`figure`] — the JSON
//!   config, cohort and results file formats, and the SVG figure emitter
//!   behind the `perr-lab` command-line tool.

pub mod cohort_csv;
pub mod config;
pub mod dgp;
pub mod error;
pub mod estimators;
pub mod figure;
pub mod harness;
pub mod results_csv;
pub mod stream;

pub use error::{Error, Result};
