use thiserror::Error;

use crate::config::ConfigError;
use crate::fit::FitError;
use crate::noise::Port;
use crate::params::ParamsError;

/// Failures of the frequency-domain models.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("angular frequency must be non-zero")]
    ZeroFrequency,
    #[error("detuning must be positive for optical-spring dependent quantities")]
    NonPositiveDetuning,
    #[error(
        "omega = {omega:.6e} rad/s sits on the optical-spring pole (relative |M| = {relative:.3e})"
    )]
    PoleAtOpticalSpring { omega: f64, relative: f64 },
    #[error("the force signal does not reach the {port} amplitude quadrature at omega = {omega:.6e} rad/s")]
    SignalNotObservable { omega: f64, port: Port },
    #[error("mode-mismatch transfer has no zero for eta = 0")]
    NoTransferZero,
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(&'static str),
}

impl ModelError {
    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ModelError::PoleAtOpticalSpring { .. } | ModelError::SignalNotObservable { .. }
        )
    }
}

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Model(e) => e.is_numerical(),
            Error::Fit(e) => e.is_numerical(),
            _ => false,
        }
    }
}
