use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument or parameter lies outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine (root finder, quadrature, optimizer) did not succeed.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// The log-likelihood was not finite at a record.
    #[error("non-finite log-likelihood contribution at record {index} (y = {y}, delta = {delta})")]
    NonFiniteLikelihood { index: usize, y: f64, delta: u8 },
    /// A dataset cannot support the requested fit.
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
    /// A matrix that must be inverted is (numerically) singular.
    #[error("singular matrix (condition number {condition:e})")]
    Singular { condition: f64 },
    /// Too many bootstrap replicates failed.
    #[error("bootstrap failed: {failed} of {requested} replicates did not converge")]
    BootstrapFailure { failed: usize, requested: usize },
    /// Unknown family tag or malformed specification string.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! numeric {
    ($($arg:tt)*) => { $crate::error::Error::Numeric(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
pub(crate) use numeric;
