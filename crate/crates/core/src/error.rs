use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("sigma = {sigma} outside the {regime} regime (0, {upper})")]
    Regime { sigma: f64, regime: &'static str, upper: f64 },

    #[error("lambda mismatch: coefficients carry {left}, operator expects {right}")]
    LambdaMismatch { left: f64, right: f64 },

    #[error("kernel is singular on the diagonal (x = y = {x})")]
    Singular { x: f64 },

    #[error("integral diverges: weight exponent {exponent} <= -1")]
    Divergent { exponent: f64 },

    #[error("non-finite integrand value at x = {x}")]
    NonFinite { x: f64 },

    #[error("tolerance {tol:e} not met after {levels} refinements (best estimate {best})")]
    ToleranceNotMet { best: f64, tol: f64, levels: u32 },

    #[error("Gauss rule construction failed for n = {n}, lambda = {lambda}: {reason}")]
    RuleConstruction { n: usize, lambda: f64, reason: &'static str },

    #[error("resolution too small: {reason}")]
    Resolution { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
