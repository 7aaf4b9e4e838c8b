use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("checksum mismatch for {0}")]
    Checksum(String),
    #[error(transparent)]
    Core(#[from] vistac_core::CoreError),
    #[error(transparent)]
    Nn(#[from] vistac_nnet::NnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownExperiment(_) | HarnessError::Json(_) => 2,
            HarnessError::Core(vistac_core::CoreError::Config(_)) => 2,
            HarnessError::MissingArtifact(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
