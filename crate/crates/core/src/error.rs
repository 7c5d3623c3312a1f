use thiserror::Error;

use crate::model::ConfigError;

/// Errors produced by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),

    #[error("{name} = {value} is outside the domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("hypergeometric series 2F1({a}, {b}; {c}; {z}) did not converge within {terms} terms")]
    SeriesConvergence {
        a: f64,
        b: f64,
        c: f64,
        z: f64,
        terms: usize,
    },

    #[error("adaptive quadrature on [{lower}, {upper}] stalled at error {error:e} after {intervals} intervals")]
    Quadrature {
        lower: f64,
        upper: f64,
        error: f64,
        intervals: usize,
    },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(Regime),
}

/// Parameter regimes the closed-form analysis does not cover.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Regime {
    /// `a_j - tau_j * a_k <= 0`: the near user can never decode the far user's message.
    #[error("a_j - tau_j*a_k = {margin} must be positive for SIC to succeed")]
    NotDecodable { margin: f64 },

    /// `a_k*tau_j < a_j <= a_k*tau_j*(1 + 1/tau_k)`: the SIC stage, not the
    /// near user's own decoding, is the binding constraint.
    #[error("a_j = {a_far} <= a_k*tau_j*(1 + 1/tau_k) = {bound}; only the SIC-slack regime is implemented")]
    SicBinding { a_far: f64, bound: f64 },

    /// The closed forms integrate a Gaussian, which needs a LOS exponent of 2.
    #[error("closed forms need alpha_L = 2, got {alpha}")]
    LosExponent { alpha: f64 },

    /// Power coefficient in the coverage kernel must be positive.
    #[error("effective power coefficient {beta} must be positive")]
    PowerCoefficient { beta: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain { name, value, reason }
}
