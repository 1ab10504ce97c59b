use thiserror::Error;

/// Library error type.
///
/// `Domain` covers arguments outside a function's mathematical domain,
/// `Numerical` covers convergence/overflow failures of an otherwise valid
/// call, and the two remaining variants cover situations where a quantity
/// the caller asked for is not defined for the given model.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The optimal sample fraction has no finite rate (bias function is
    /// identically zero, so every intermediate sequence works).
    #[error("undefined rate: {0}")]
    UndefinedRate(String),
    /// The bias function changes sign on the probed range, so no ultimate
    /// sign — and hence no ordering prediction — can be established.
    #[error("indeterminate bias sign: {0}")]
    IndeterminateSign(String),
}

pub type Result<T> = std::result::Result<T, Error>;
