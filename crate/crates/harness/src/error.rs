use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] nlt_core::Error),
    #[error(transparent)]
    Checkpoint(#[from] nlt_core::CheckpointError),
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("member run {label} ended {status}")]
    MemberFailed { label: String, status: String },
    #[error("{0}")]
    Study(String),
}

impl HarnessError {
    pub fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
