use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hyperbolicity violated at (x0={x0}, r={r}): discriminant {q}")]
    HyperbolicityViolation { x0: f64, r: f64, q: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size collapse at x0={x0}, r={r}")]
    StepSizeCollapse { x0: f64, r: f64 },

    #[error("degenerate classification at r_s={r_s}: xi0+={xi_plus}, xi0-={xi_minus}")]
    DegenerateClassification {
        r_s: f64,
        xi_plus: f64,
        xi_minus: f64,
    },

    #[error("no horizon in window: {0}")]
    NoHorizonInWindow(String),

    #[error("window too short: {0}")]
    WindowTooShort(String),

    #[error("contraction failure: {0}")]
    ContractionFailure(String),

    #[error("reparameterization invalid: {0}")]
    Reparameterization(String),

    #[error("hamiltonian drift {drift} exceeds tolerance {tol}")]
    HamiltonianDrift { drift: f64, tol: f64 },

    #[error("ergosphere location failed: {0}")]
    PartialErgosphere(String),

    #[error("degenerate characteristic coordinates: {0}")]
    DegenerateCoordinates(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
