use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 3, got {0}")]
    InvalidDimension(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("boundary point: use boundary_residual")]
    BoundaryPoint,

    #[error("weight overflow: |x|^2 = {0} exceeds the guard")]
    WeightOverflow(f64),

    #[error("test function defined for tau=1, got tau={0}")]
    TauNotOne(f64),

    #[error("invalid integrand sample at rho={rho}, x_N={xn}")]
    InvalidIntegrand { rho: f64, xn: f64 },

    #[error("quadrature unconverged: value {value:e}, error estimate {error:e}")]
    Unconverged { value: f64, error: f64 },

    #[error("expansion regime violation: {0}")]
    RegimeViolation(String),

    #[error("ill-conditioned fit (condition number {0:e})")]
    IllConditioned(f64),

    #[error("non-unimodal fiber: {0} critical points")]
    NonUnimodal(usize),

    #[error("trivial function: zero denominator")]
    TrivialFunction,

    #[error("iteration did not converge: {0}")]
    NotConverged(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("factorisation failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
