use thiserror::Error;

/// Errors raised by the solvers, samplers and experiment harnesses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("estimator failed on replication {replication}: {message}")]
    Estimator { replication: usize, message: String },

    #[error("degenerate regression: risk estimates must be strictly positive")]
    DegenerateRegression,

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("estimate {value} lies outside the modulus domain [0, {delta})")]
    OutOfDomain { value: f64, delta: f64 },

    #[error("logarithm undefined between antipodal points")]
    AntipodalPoint,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        /// Coordinates of the last iterate.
        last: Vec<f64>,
    },

    #[error("degenerate eigengap: lambda1 - lambda2 = {0:e}")]
    DegenerateEigengap(f64),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("empty region: {0}")]
    Empty(String),

    #[error("linear program: {0}")]
    Solver(String),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract inputs, as
    /// opposed to numerical failures inside a solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::TooLarge(_) | Error::Empty(_) | Error::InvalidDensity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
