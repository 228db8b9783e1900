use std::io;
use std::path::PathBuf;

use lagshap_core::ErrorKind;

/// Errors surfaced by the command line and file formats.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] lagshap_core::Error),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: lagshap_core::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    /// Process exit code: 1 validation, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        let kind = match self {
            AppError::Core(e) | AppError::Stage { source: e, .. } => e.kind(),
            AppError::Config(_) => ErrorKind::Validation,
            AppError::Parse { .. } | AppError::Io { .. } | AppError::Csv(_) | AppError::Json(_) => ErrorKind::Data,
        };
        match kind {
            ErrorKind::Validation => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }
}

/// Attaches a pipeline stage label to core errors.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> AppResult<T>;
}

impl<T> StageExt<T> for lagshap_core::Result<T> {
    fn stage(self, stage: &'static str) -> AppResult<T> {
        self.map_err(|source| AppError::Stage { stage, source })
    }
}
