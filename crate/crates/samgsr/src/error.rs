use thiserror::Error;

/// Unified error type for the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A value, shape, or label set violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A run parameter is out of range or inconsistent with other flags.
    #[error("configuration error: {0}")]
    Config(String),

    /// A gene with zero variance across samples cannot be standardized.
    #[error("gene '{0}' has zero variance across samples")]
    ZeroVariance(String),

    /// Malformed content in an input file, addressed by line (and column).
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Underlying filesystem failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable discriminant for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "config",
            Error::ZeroVariance(_) => "zero_variance",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
