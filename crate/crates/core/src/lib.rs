//! Force-noise modelling for a detuned optomechanical cavity read out in the
//! amplitude quadrature, where the optical spring cancels part of the
//! mechanical response and opens a sub-SQL dip.
//!
//! Internally all frequencies are angular (rad/s); Hz appears only in grid
//! specifications, measured spectra and file formats.

pub mod analytic;
pub mod budget;
pub mod config;
pub mod constants;
pub mod error;
pub mod fit;
pub mod matrix;
pub mod noise;
pub mod optimize;
pub mod params;
pub mod twophoton;

pub use analytic::{characteristic_frequencies, ApproximationWarning, CharacteristicFrequencies};
pub use budget::{Engine, FrequencyGrid, GridScale, NoiseBudget};
pub use config::{ConfigError, ParamsConfig};
pub use error::{Error, ModelError};
pub use fit::{DipFitResult, FitError, MeasuredSpectrum, RatioFitResult, RatioPoint};
pub use matrix::{TwoPhotonMatrix, C64};
pub use noise::{NormalizedSpectrum, Port};
pub use params::{CavityParams, DerivedQuantities, ParamsError};
pub use twophoton::{EngineOptions, MirrorReflectivity};
