use thiserror::Error;

/// Errors raised by the geometric and numerical operations of this crate.
///
/// Solver failures (no critical point, no witness) are *not* errors; they are
/// reported through `Option` / `bool` results.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("base points differ")]
    BaseMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failed: {what} (worst residual {worst_residual:e})")]
    Verification { what: String, worst_residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
