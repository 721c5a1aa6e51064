use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order must satisfy p > 1, got {0}")]
    InvalidOrder(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sign change of L_{p} found in (0, 1)")]
    NoSignChange { p: f64 },

    #[error("zero of L_{p} could not be refined below tolerance {tol:e} (residual {residual:e})")]
    ToleranceNotMet { p: f64, tol: f64, residual: f64 },

    #[error("|L_p'(z_p)| = {0:e} is too small to match derivatives")]
    DegenerateDerivative(f64),

    #[error("U is undefined at the origin x = y = 0")]
    OriginUndefined,

    #[error("second derivative of the obstacle is unavailable at s = {0}")]
    SecondDerivativeUnavailable(f64),

    #[error("output error: {0}")]
    Output(String),

    #[error("path {path} left the finite range at step {step}")]
    NonFiniteState { path: usize, step: usize },
}
