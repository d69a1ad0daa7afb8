use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
    /// A set, join or search grew past a configured cap. The message names
    /// the cap and, where one exists, the cheaper alternative.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An internal consistency check failed; this indicates a bug.
    #[error("postcondition violated: {0}")]
    Postcondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
