use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used for
/// the computation; they are diagnostic only.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state left the domain of `{system}` at x = {x}: {detail}")]
    DomainExit {
        system: String,
        x: f64,
        detail: String,
    },

    #[error("step size underflow at t = {t} (h = {h:e}); finite-time singularity suspected")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },

    #[error("no return to the section within t_max = {t_max}")]
    NoReturn { t_max: f64 },

    #[error("at least {needed} points are required, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("adaptive quadrature failed to reach tolerance {tol:e} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },

    #[error("transformation is singular at ({z1}, {z2}): |det| = {det:e}")]
    SingularTransformation { z1: f64, z2: f64, det: f64 },

    #[error("invalid involution: {0}")]
    InvalidInvolution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
