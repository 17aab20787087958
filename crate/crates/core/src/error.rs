use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument was outside the physical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive quadrature ran out of subdivisions before reaching the
    /// requested tolerance. The partial estimate and its error bound are
    /// carried so callers can decide whether the result is still usable.
    #[error(
        "integration did not converge: estimate {estimate:.6e} with error bound \
         {error_bound:.3e} after {subdivisions} subdivisions"
    )]
    Integration {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// The scalar optimizer could not bracket an interior maximum.
    #[error("optimization failed: {0}")]
    Optimization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
