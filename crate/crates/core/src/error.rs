use thiserror::Error;

pub type Result<T> = std::result::Result<T, KstError>;

#[derive(Debug, Error)]
pub enum KstError {
    /// Malformed or inconsistent caller input.
    #[error("input error: {0}")]
    Input(String),
    /// A factorization or log-argument went non-positive.
    #[error("numerical conditioning error: {0}")]
    Numerical(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl KstError {
    pub fn input(msg: impl Into<String>) -> Self {
        KstError::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        KstError::Numerical(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        KstError::Unsupported(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            KstError::Input(_) | KstError::Io(_) => 2,
            KstError::Numerical(_) => 3,
            KstError::Unsupported(_) => 4,
        }
    }
}
