use thiserror::Error;

/// Errors raised by the capacity library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "unsupported configuration: q = {q} exceeds the closed-form envelope (q <= {max}); \
         use the quadrature or Monte-Carlo evaluators instead"
    )]
    UnsupportedConfiguration { q: usize, max: usize },

    #[error("capacity is unbounded: {0}")]
    Unbounded(&'static str),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("eigen-decomposition failed: {0}")]
    EigenDecomposition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
