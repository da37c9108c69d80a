//! Error types shared across the crate.

/// Crate-wide error type.
///
/// The CLI maps variants to exit codes: config -> 2, accuracy -> 3,
/// resource -> 4; domain and unsupported-variant errors are argument
/// problems and also exit with 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Numerical routine failed to reach its tolerance. Carries the best
    /// estimate obtained so far.
    #[error("accuracy error: {message} (best estimate {best})")]
    Accuracy { message: String, best: f64 },

    #[error("unsupported body variant: {0}")]
    Unsupported(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn accuracy(msg: impl Into<String>, best: f64) -> Self {
        Error::Accuracy {
            message: msg.into(),
            best,
        }
    }

    /// Exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Unsupported(_) | Error::Config(_) => 2,
            Error::Accuracy { .. } => 3,
            Error::Resource(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
