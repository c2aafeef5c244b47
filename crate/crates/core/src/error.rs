use thiserror::Error;

/// Library-wide error type. `Precondition` and `Invariant` mean the inputs or
/// an internal contract are bad (CLI exit 3); `Stage` and `Exhausted` mean a
/// probabilistic or search stage legitimately failed (CLI exit 2).
#[derive(Error, Debug)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("stage failed: {0}")]
    Stage(String),
    #[error("search exhausted: {0}")]
    Exhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
    pub fn stage(msg: impl Into<String>) -> Self {
        Error::Stage(msg.into())
    }

    /// Exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage(_) | Error::Exhausted(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
