use thiserror::Error;

/// Errors raised by the numeric kernels and the table/sieve machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative argument {0} (function defined for v >= 0 only)")]
    NegativeArgument(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of zeta at s = 1")]
    Pole,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("consistency check failed: {what} (discrepancy {discrepancy:e}, tolerance {tolerance:e})")]
    Consistency {
        what: String,
        discrepancy: f64,
        tolerance: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("argument {value} outside the available range [1, {limit}]")]
    Range { value: f64, limit: u64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("non-finite intermediate value in {0}")]
    NonFinite(&'static str),

    #[error("cache format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn consistency(what: impl Into<String>, discrepancy: f64, tolerance: f64) -> Self {
        Error::Consistency {
            what: what.into(),
            discrepancy,
            tolerance,
        }
    }
}
