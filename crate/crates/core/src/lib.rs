//! Coverage and throughput of clustered mmWave NOMA downlinks.
//!
//! BSs form a Poisson point process, users scatter around them as a Thomas
//! cluster process, and each BS serves a nearest-random (NR) NOMA pair with a
//! ULA whose misalignment gain is the Fejér kernel. The crate offers:
//!
//! * [`analytic`]: numerical evaluation of the stochastic-geometry
//!   coverage expressions and their closed-form specialisations;
//! * [`montecarlo`]: a seeded, parallel simulator of the same system;
//! * [`specfun`]: the Gauss hypergeometric function and quadratures they need.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use analytic::{AccessMode, AnalyticContext, CoverageResult, Method, Throughput};
pub use error::{Error, Regime, Result};
pub use model::{ConfigError, LinkState, PathLossParams, SystemConfig};
pub use montecarlo::{
    estimate_coverage, estimate_throughput, simulate_trial, CoverageEstimate, SimOptions, TrialOutcome,
};
