use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this seed family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Input violates a documented precondition (ordering, lengths).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested work exceeds the configured budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Sequence has summable covariances; there is no long-memory exponent.
    #[error("no long memory: the trawl sequence has summable autocovariances (d* = 0)")]
    NoLongMemory,

    /// A spectral shape is nonpositive on the frequency grid.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// The input series carries no information (e.g. constant).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An optimization found no admissible point.
    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
