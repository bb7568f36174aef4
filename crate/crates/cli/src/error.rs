use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] lossrate::Error),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl HarnessError {
    /// 2 for failed checks and tripped solver guards, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Model(lossrate::Error::TraceDrift { .. } | lossrate::Error::FockLeakage { .. }) => 2,
            _ => 1,
        }
    }
}
