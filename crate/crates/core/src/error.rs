use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A covariance matrix could not be factorized even after jitter escalation.
    #[error("{what} is numerically singular (psi = {psi}, mean support spacing = {spacing})")]
    Singular {
        what: &'static str,
        psi: f64,
        spacing: f64,
    },

    #[error("model evaluation failed: {0}")]
    Model(String),

    #[error("chain initialization failed: {0}")]
    Initialization(String),

    #[error("diagnostic unavailable: {0}")]
    Diagnostic(String),

    #[error("archive is empty")]
    EmptyArchive,

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Numerical failures (singular matrices, model failures, non-finite
    /// starting densities) as opposed to bad user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::Model(_)
                | Error::Initialization(_)
                | Error::Diagnostic(_)
                | Error::EmptyArchive
        )
    }
}
