//! Noise budgets over a frequency grid.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, ApproximationWarning};
use crate::constants::hz_to_rad;
use crate::error::ModelError;
use crate::noise::{NormalizedSpectrum, Port};
use crate::params::CavityParams;
use crate::twophoton::{force_noise_spectrum_exact, EngineOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

/// Frequency grid in Hz, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl FrequencyGrid {
    pub fn new(
        start_hz: f64,
        stop_hz: f64,
        points: usize,
        scale: GridScale,
    ) -> Result<Self, ModelError> {
        if !(start_hz.is_finite() && stop_hz.is_finite()) || start_hz >= stop_hz {
            return Err(ModelError::InvalidGrid("start must be below stop"));
        }
        if points < 2 {
            return Err(ModelError::InvalidGrid("at least two points are required"));
        }
        if scale == GridScale::Log && start_hz <= 0.0 {
            return Err(ModelError::InvalidGrid("log grid needs a positive start"));
        }
        Ok(FrequencyGrid {
            start_hz,
            stop_hz,
            points,
            scale,
        })
    }

    pub fn log(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self, ModelError> {
        Self::new(start_hz, stop_hz, points, GridScale::Log)
    }

    pub fn linear(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self, ModelError> {
        Self::new(start_hz, stop_hz, points, GridScale::Linear)
    }

    pub fn frequencies_hz(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    return self.stop_hz;
                }
                let t = i as f64 / last;
                match self.scale {
                    GridScale::Linear => self.start_hz + t * (self.stop_hz - self.start_hz),
                    GridScale::Log => self.start_hz * (self.stop_hz / self.start_hz).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Full two-photon matrix evaluation.
    Exact,
    /// Leading-order closed forms.
    ClosedForm,
}

/// SQL-normalized per-port power spectra on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub port: Port,
    pub engine: Engine,
    pub freq_hz: Vec<f64>,
    pub spectra: Vec<NormalizedSpectrum>,
    /// Closed-form validity warnings, deduplicated by kind (first occurrence).
    pub warnings: Vec<ApproximationWarning>,
}

pub fn evaluate(
    params: &CavityParams,
    omega: f64,
    port: Port,
    engine: Engine,
    opts: &EngineOptions,
) -> Result<NormalizedSpectrum, ModelError> {
    match engine {
        Engine::Exact => {
            force_noise_spectrum_exact(params, omega, port, opts).map(|s| s.normalized)
        }
        Engine::ClosedForm => analytic::closed_form_spectrum(params, omega, port),
    }
}

impl NoiseBudget {
    pub fn compute(
        params: &CavityParams,
        grid: &FrequencyGrid,
        port: Port,
        engine: Engine,
        opts: &EngineOptions,
    ) -> Result<Self, ModelError> {
        let freq_hz = grid.frequencies_hz();
        let mut warnings: Vec<ApproximationWarning> = Vec::new();
        let spectra = freq_hz
            .iter()
            .map(|&f| {
                let w = hz_to_rad(f);
                if engine == Engine::ClosedForm {
                    for warn in analytic::approximation_warnings(params, w) {
                        if !warnings
                            .iter()
                            .any(|x| std::mem::discriminant(x) == std::mem::discriminant(&warn))
                        {
                            log::warn!("{warn}");
                            warnings.push(warn);
                        }
                    }
                }
                evaluate(params, w, port, engine, opts)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NoiseBudget {
            port,
            engine,
            freq_hz,
            spectra,
            warnings,
        })
    }

    /// Copy with every component replaced by its square root (amplitude
    /// spectral density relative to the SQL).
    pub fn amplitude(&self) -> Self {
        NoiseBudget {
            spectra: self
                .spectra
                .iter()
                .map(NormalizedSpectrum::amplitude)
                .collect(),
            ..self.clone()
        }
    }

    /// Grid point with the lowest total.
    pub fn minimum_total(&self) -> Option<(f64, f64)> {
        self.freq_hz
            .iter()
            .zip(&self.spectra)
            .map(|(&f, s)| (f, s.total))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Largest relative deviation `|a - b| / |b|` per column between two budgets
/// on the same grid (`b` is the reference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetDifference {
    pub b1: f64,
    pub b2: f64,
    pub d: f64,
    pub total: f64,
}

impl BudgetDifference {
    pub fn max(&self) -> f64 {
        self.b1.max(self.b2).max(self.d).max(self.total)
    }
}

pub fn max_relative_difference(a: &NoiseBudget, reference: &NoiseBudget) -> BudgetDifference {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let mut out = BudgetDifference {
        b1: 0.0,
        b2: 0.0,
        d: 0.0,
        total: 0.0,
    };
    for (x, y) in a.spectra.iter().zip(&reference.spectra) {
        out.b1 = out.b1.max(rel(x.b1, y.b1));
        out.b2 = out.b2.max(rel(x.b2, y.b2));
        out.d = out.d.max(rel(x.d(), y.d()));
        out.total = out.total.max(rel(x.total, y.total));
    }
    out
}
