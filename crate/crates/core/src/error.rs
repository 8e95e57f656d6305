use thiserror::Error;

/// Errors raised by the samplers, simulator, estimators and campaign runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The estimator denominator `sum X_i^2 dt_i` vanished.
    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("unsupported diagnostic: {0}")]
    UnsupportedDiagnostic(String),

    #[error("replication {index} failed: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True when the root cause is a degenerate path (also through a replication wrapper).
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::DegeneratePath(_) => true,
            Error::Replication { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
