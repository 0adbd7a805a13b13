use thiserror::Error;

/// Errors surfaced by the simulation kernels.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A parameter violated a precondition (non-positive step size,
    /// negative variance, argument outside the domain of a transform, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An Itô step produced a non-positive determinant; the step size is
    /// too coarse for the sampled increment.
    #[error("step failed at tau = {tau}: det(F + F dB) = {det} <= 0; reduce dt")]
    StepFailed { tau: f64, det: f64 },

    /// The requested spectral band is not resolved by the grid.
    #[error("grid does not resolve the requested band: {0}")]
    GridUnresolved(String),

    /// A shell of the scale decomposition contains no Fourier modes.
    #[error("empty shell ({l_left}, {l_right}]: refine the field (larger torus) or coarsen the lnL grid")]
    EmptyShell { l_left: f64, l_right: f64 },

    /// Deterministic quadrature failed to reach the requested accuracy.
    #[error(
        "quadrature did not converge: achieved error bound {achieved:e} > requested {requested:e}"
    )]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    /// A CFL-type stability condition was violated.
    #[error("CFL violation: {0}")]
    CflViolation(String),

    /// A numerical failure (NaN, blow-up) was detected.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
