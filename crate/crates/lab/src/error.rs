use std::path::Path;

/// Errors from IO, parsing and the numerical core.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] rwqda_core::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        LabError::Data(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        LabError::Usage(msg.into())
    }

    /// Process exit code: 1 usage, 2 data or IO, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use rwqda_core::Error as E;
        match self {
            LabError::Usage(_) => 1,
            LabError::Io { .. } | LabError::Parse { .. } | LabError::Data(_) => 2,
            LabError::Core(E::NotPositiveDefinite { .. })
            | LabError::Core(E::PositiveDefiniteRejected { .. })
            | LabError::Core(E::NotSymmetric { .. }) => 3,
            LabError::Core(_) => 2,
        }
    }
}
