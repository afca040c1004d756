use thiserror::Error;

/// Failures of a run, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configs or input files (exit 2).
    #[error("{0}")]
    Validation(String),
    /// A solver or estimator failed on valid input (exit 3).
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<frechet_lab::Error> for CliError {
    fn from(e: frechet_lab::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}
