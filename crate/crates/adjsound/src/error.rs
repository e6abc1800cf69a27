use std::path::{Path, PathBuf};

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Invalid or inconsistent settings; the message names the key.
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed data file.
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    /// The solver produced non-finite or inadmissible values.
    #[error("numerical abort: {0}")]
    Numerical(adjsound_core::Error),

    /// A solver precondition failed for reasons other than the settings.
    #[error(transparent)]
    Core(adjsound_core::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        AppError::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    /// Process exit status: 2 configuration, 3 numerical abort,
    /// 4 verification failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Verification(_) => 4,
            _ => 1,
        }
    }
}

impl From<adjsound_core::Error> for AppError {
    fn from(e: adjsound_core::Error) -> Self {
        use adjsound_core::Error as E;
        if e.is_numerical() {
            return AppError::Numerical(e);
        }
        match e {
            E::Config(_) | E::TooFewNodes { .. } | E::OutsideDomain { .. } | E::MicrophonesOutside(_) | E::Cfl { .. } | E::Band { .. } => {
                AppError::Config(e.to_string())
            }
            other => AppError::Core(other),
        }
    }
}
