use qamp_core::oracle::OracleError;

/// Exit status 2.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status 3.
pub const EXIT_NUMERIC: u8 = 3;
/// Exit status 1: the output could not be written.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numeric(_) => EXIT_NUMERIC,
            Self::Io { .. } => EXIT_IO,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<qamp_core::Error> for CliError {
    fn from(e: qamp_core::Error) -> Self {
        use qamp_core::Error as E;
        match e {
            E::QuadratureNonConvergence { .. } | E::MandelUndefined | E::TemperatureUndefined => {
                Self::Numeric(e.to_string())
            }
            E::InvalidParameter { .. }
            | E::Domain { .. }
            | E::IllDefinedP { .. }
            | E::GridTooSmall { .. }
            | E::NonGaussianInput(_)
            | E::Unsupported(_) => Self::Config(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Invalid(inner) => inner.into(),
            other => Self::Numeric(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
