use thiserror::Error;

/// Errors raised by the analytic routines and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not reach its tolerance within the term cap.
    #[error("series did not converge within {terms} terms (tail estimate {tail:e})")]
    NonConvergence { terms: usize, tail: f64 },

    /// Table lookup outside of the stored range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An alternating sum lost too many digits to be trusted.
    #[error("numerical instability: {0}")]
    Instability(String),

    /// A bracketed solver found no sign change.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// Inconsistent or malformed configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
