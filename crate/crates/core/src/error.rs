//! Error type shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A tilt (or moment weight) lies outside the finite-moment radius.
    #[error("tilt {delta} outside the exponential-moment radius {t0}")]
    TiltOutOfRange { delta: f64, t0: f64 },

    /// An integral against the disorder law does not converge.
    #[error("integral does not converge: {0}")]
    IntegrabilityViolation(String),

    /// Parameters violate the admissible range of an operation.
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    /// Inversion target lies outside the mapped image.
    #[error("target {y} outside the invertible image (supremum {sup})")]
    OutOfImage { y: f64, sup: f64 },

    /// The disorder sequence is empty.
    #[error("empty disorder sequence")]
    EmptyDisorder,

    /// Bisection could not bracket a sign change.
    #[error("no bracket found within |h| <= {limit}")]
    BracketNotFound { limit: f64 },

    /// Exact enumeration would exceed the configured state budget.
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),

    /// A Monte Carlo estimate is degenerate (e.g. no sample hit the event).
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    /// A distribution or model specification is invalid.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// An experiment configuration is invalid or incomplete.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidSpec(_)
                | Error::ParameterOutOfRange(_)
                | Error::TiltOutOfRange { .. }
        )
    }
}
