use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error(transparent)]
    Core(#[from] emhd_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
}

impl RunnerError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure comes from invalid input rather than the run.
    pub fn is_config(&self) -> bool {
        match self {
            Self::Config(_) => true,
            Self::Core(e) => !matches!(e, emhd_core::Error::BlowupDetected { .. }),
            Self::Io { .. } => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, RunnerError>;
