use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid model parameters: {0}")]
    Model(String),

    #[error(transparent)]
    Analysis(#[from] isochrone::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Self::Model(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 numerical or IO failure, 3 invalid model parameters.
    pub fn exit_code(&self) -> u8 {
        use isochrone::Error as E;
        match self {
            Self::Usage(_) => 1,
            Self::Model(_) => 3,
            Self::Io { .. } | Self::Format { .. } => 2,
            Self::Analysis(e) => match e {
                E::InvalidParameter(_)
                | E::InvalidInvolution(_)
                | E::SingularTransformation { .. }
                | E::DimensionMismatch { .. } => 3,
                E::InvalidConfig(_) | E::InsufficientPoints { .. } => 1,
                E::DomainExit { .. }
                | E::StepUnderflow { .. }
                | E::MaxStepsExceeded { .. }
                | E::NoReturn { .. }
                | E::QuadratureFailure { .. } => 2,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
