use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature did not reach its tolerance within the subdivision cap.
    #[error("accuracy not reached: estimate {estimate:e} with error {error:e} (target {target:e})")]
    Accuracy {
        estimate: f64,
        error: f64,
        target: f64,
    },

    /// The integral diverges (e.g. the J₂-type integral in dimension five).
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// Least-squares fit could not be formed.
    #[error("fit error: {0}")]
    Fit(String),

    /// Grid too coarse or otherwise degenerate.
    #[error("grid error: {0}")]
    Grid(String),

    /// Iterative eigen-solver failure.
    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    /// Both ends of a bisection classify identically.
    #[error("bracketing error: {0}")]
    Bracketing(String),

    /// The check does not apply to the supplied input.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A linear system could not be factored.
    #[error("singular system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
