use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("cannot write {path}: {source}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("session failed: {0}")]
    Session(teleqkd::Error),
}

impl HarnessError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for I/O, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Io { .. } => 3,
            HarnessError::Session(_) => 1,
        }
    }
}

impl From<teleqkd::Error> for HarnessError {
    fn from(e: teleqkd::Error) -> Self {
        match e {
            teleqkd::Error::InvalidParameter { field, reason } => HarnessError::config(field, reason),
            teleqkd::Error::NotPrime(d) => HarnessError::config("d", format!("{d} is not prime")),
            other => HarnessError::Session(other),
        }
    }
}
