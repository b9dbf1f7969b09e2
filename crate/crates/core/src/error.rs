use thiserror::Error;

/// Unified error type for the library.
///
/// Every fallible public operation returns `Result<T, Error>`. Panics are
/// reserved for violated internal invariants (programming errors), never for
/// bad user input.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Instance text could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A precondition that callers must establish was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A number-theoretic construction failed (e.g. a profit grid point has
    /// no good integers, so its interval union is empty).
    #[error("construction failed: {0}")]
    Construction(String),

    /// A lookup inside a structured set (tower level, generator chain)
    /// found no admissible element.
    #[error("not found: {0}")]
    NotFound(String),

    /// An exact reference computation was refused because the instance is
    /// too large for the oracle's resource guard.
    #[error("oracle refused: {0}")]
    OracleRefused(String),
}

pub type Result<T> = std::result::Result<T, Error>;
