use alloc::string::String;

/// Errors reported by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} = {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("relaxation did not converge after {iterations} iterations (last correction {last_correction:e})")]
    RelaxationDiverged {
        iterations: usize,
        last_correction: f64,
    },
    #[error("ODE integration failed at s = {at}: {reason}")]
    Integration { at: f64, reason: &'static str },
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
    #[error("no Painleve state solved for lambda = {0}")]
    MissingState(f64),
    #[error("asymptotic series would overflow for t = {0}")]
    Overflow(f64),
    #[error("probability {p} lies outside the range [{lo}, {hi}] attained on the grid")]
    OutOfSupport { p: f64, lo: f64, hi: f64 },
    #[error("resource guard: estimated cost {estimate:e} exceeds budget {budget:e}")]
    Budget { estimate: f64, budget: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_range(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value, lo, hi })
    }
}
