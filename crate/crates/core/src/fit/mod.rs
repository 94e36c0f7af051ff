//! Analysis of measured spectra: the detuning-jitter dip model, ratio fits
//! for the input coupling, and detuning from transmitted power.

mod dip;
mod ratio;
mod spectrum;
pub mod synth;

use thiserror::Error;

pub use dip::{
    dip_model, dip_model_averaged, fit_dip, DipFitOptions, DipFitResult, DipParams, JitterAverage,
};
pub use ratio::{
    detuning_error_from_transmission, detuning_from_transmission, fit_ratio, ratio_model,
    read_ratio_csv, write_ratio_csv, RatioFitOptions, RatioFitResult, RatioPoint,
};
pub use spectrum::MeasuredSpectrum;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("the fit band does not bracket an interior minimum of the data")]
    DegenerateBand,
    #[error("invalid model parameters: {0}")]
    InvalidModelParams(&'static str),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("optimizer did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("measured power exceeds the maximum transmitted power")]
    MeasuredExceedsMax,
    #[error("powers must be positive")]
    NonPositivePower,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl FitError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, FitError::NoConvergence { .. })
    }
}
