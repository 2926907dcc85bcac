use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the evaluators and their building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A Hermite index (or basis size) exceeds the configured capability.
    #[error("index {index} exceeds the configured cap {cap}")]
    IndexCap { index: usize, cap: usize },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The complex error function overflows for this argument.
    #[error("erfc overflows at z = {0}")]
    Overflow(Complex64),

    /// The requested combination is not covered by the chosen route.
    #[error("unsupported by this route: {0}")]
    Unsupported(String),

    /// A truncated Fock basis is too small for the state.
    #[error("Fock truncation too small: trace deficit {deficit:.3e} at dim {dim}")]
    TraceDeficit { dim: usize, deficit: f64 },

    /// The quadratic form of the integral route lost positivity.
    #[error("Re(sigma) = {re:.3e} is not positive at u = {u}")]
    NonPositiveSigma { u: f64, re: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
