//! Flat JSON parameter documents.
//!
//! ```json
//! {
//!   "wavelength_m": 1.064e-6, "length_m": 0.1, "mass_kg": 1e-5,
//!   "kappa_hz": 250000.0, "kappa_in_over_kappa": 0.8,
//!   "detuning_over_kappa": 0.57735, "intracavity_power_w": 1.0
//! }
//! ```
//!
//! `kappa_hz` is kappa/2pi; `finesse` may replace it. Exactly one of
//! `intracavity_power_w` and `input_power_w` must be present. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{hz_to_rad, rad_to_hz};
use crate::params::{finesse_to_kappa, CavityParams, ParamsError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("give exactly one of `kappa_hz` and `finesse`")]
    DecaySpec,
    #[error("give exactly one of `intracavity_power_w` and `input_power_w`")]
    PowerSpec,
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub wavelength_m: f64,
    pub length_m: f64,
    pub mass_kg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    pub kappa_in_over_kappa: f64,
    pub detuning_over_kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intracavity_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_matching: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rin_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rin_phase: Option<f64>,
}

impl ParamsConfig {
    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Resolves the document into validated parameters.
    pub fn to_params(&self) -> Result<CavityParams, ConfigError> {
        let kappa = match (self.kappa_hz, self.finesse) {
            (Some(k), None) => hz_to_rad(k),
            (None, Some(f)) => finesse_to_kappa(f, self.length_m)?,
            _ => return Err(ConfigError::DecaySpec),
        };
        let mut params = CavityParams {
            wavelength: self.wavelength_m,
            cavity_length: self.length_m,
            mirror_mass: self.mass_kg,
            total_decay: kappa,
            input_coupling: self.kappa_in_over_kappa * kappa,
            detuning: self.detuning_over_kappa * kappa,
            intracavity_power: 1.0,
            mode_matching: self.mode_matching.unwrap_or(1.0),
            rin_amplitude: self.rin_amplitude.unwrap_or(1.0),
            rin_phase: self.rin_phase.unwrap_or(1.0),
            input_power: None,
        };
        params = match (self.intracavity_power_w, self.input_power_w) {
            (Some(p), None) => params.with_intracavity_power(p),
            (None, Some(p_in)) => {
                if !(p_in.is_finite() && p_in > 0.0) {
                    return Err(ParamsError::NonPositiveInputPower.into());
                }
                params.with_input_power(p_in)
            }
            _ => return Err(ConfigError::PowerSpec),
        };
        Ok(params.validate()?)
    }

    /// Document describing `params` (kappa given in Hz).
    pub fn from_params(params: &CavityParams) -> Self {
        let kappa = params.total_decay;
        ParamsConfig {
            wavelength_m: params.wavelength,
            length_m: params.cavity_length,
            mass_kg: params.mirror_mass,
            kappa_hz: Some(rad_to_hz(kappa)),
            finesse: None,
            kappa_in_over_kappa: params.input_coupling / kappa,
            detuning_over_kappa: params.detuning / kappa,
            intracavity_power_w: params
                .input_power
                .is_none()
                .then_some(params.intracavity_power),
            input_power_w: params.input_power,
            mode_matching: Some(params.mode_matching),
            rin_amplitude: Some(params.rin_amplitude),
            rin_phase: Some(params.rin_phase),
        }
    }
}
