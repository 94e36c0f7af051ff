//! Closed-form noise spectra and characteristic frequencies.
//!
//! These expressions keep only the leading order in `omega / kappa` and
//! `omega_opt / kappa`. [`approximation_warnings`] reports when an evaluation
//! point leaves that regime; the formulas themselves stay usable for sweeps.
//! All spectra are SQL-normalized power spectral densities.

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::ModelError;
use crate::noise::{NormalizedSpectrum, Port};
use crate::params::CavityParams;
use crate::twophoton::mechanical_susceptibility;

/// `omega / kappa` and `omega_opt / kappa` above this value trigger a warning.
pub const APPROXIMATION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFrequencies {
    /// Optical-spring resonance [rad/s].
    pub omega_opt: f64,
    /// Back-action cancellation dip with perfect mode matching [rad/s].
    pub omega_dip: f64,
    /// Dip observed with mode matching `eta` [rad/s].
    pub omega_dip_measured: f64,
}

impl CharacteristicFrequencies {
    pub fn ratio_opt_over_dip_measured(&self) -> f64 {
        self.omega_opt / self.omega_dip_measured
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproximationWarning {
    FrequencyNotSmall { omega_over_kappa: f64 },
    SpringNotSmall { omega_opt_over_kappa: f64 },
}

impl std::fmt::Display for ApproximationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ApproximationWarning::FrequencyNotSmall { omega_over_kappa } => write!(
                f,
                "omega/kappa = {omega_over_kappa:.3} exceeds {APPROXIMATION_LIMIT}; closed forms lose accuracy"
            ),
            ApproximationWarning::SpringNotSmall { omega_opt_over_kappa } => write!(
                f,
                "omega_opt/kappa = {omega_opt_over_kappa:.3} exceeds {APPROXIMATION_LIMIT}; closed forms lose accuracy"
            ),
        }
    }
}

pub fn approximation_warnings(params: &CavityParams, omega: f64) -> Vec<ApproximationWarning> {
    let kappa = params.total_decay;
    let mut out = Vec::new();
    let r = omega.abs() / kappa;
    if r > APPROXIMATION_LIMIT {
        out.push(ApproximationWarning::FrequencyNotSmall {
            omega_over_kappa: r,
        });
    }
    if let Ok(w_opt) = omega_opt(params) {
        let r = w_opt / kappa;
        if r > APPROXIMATION_LIMIT {
            out.push(ApproximationWarning::SpringNotSmall {
                omega_opt_over_kappa: r,
            });
        }
    }
    out
}

fn spring_guard(params: &CavityParams) -> Result<(), ModelError> {
    if params.detuning > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositiveDetuning)
    }
}

fn guards(params: &CavityParams, omega: f64) -> Result<(), ModelError> {
    spring_guard(params)?;
    if omega == 0.0 {
        return Err(ModelError::ZeroFrequency);
    }
    Ok(())
}

/// `sqrt(Delta iota / (kappa^2 + Delta^2))`.
pub fn omega_opt(params: &CavityParams) -> Result<f64, ModelError> {
    spring_guard(params)?;
    let (k, d) = (params.total_decay, params.detuning);
    Ok((d * params.iota() / (k * k + d * d)).sqrt())
}

/// `sqrt(Delta iota / ((kappa - 2 kappa_in)^2 + Delta^2))`.
pub fn omega_dip(params: &CavityParams) -> Result<f64, ModelError> {
    spring_guard(params)?;
    let (k, d) = (params.total_decay, params.detuning);
    let x = k - 2.0 * params.input_coupling;
    Ok((d * params.iota() / (x * x + d * d)).sqrt())
}

/// `sqrt(Delta iota / (kappa^2 + Delta^2 - 4 kappa_in (kappa - kappa_in) eta))`.
pub fn omega_dip_measured(params: &CavityParams) -> Result<f64, ModelError> {
    spring_guard(params)?;
    let (k, d, ki) = (params.total_decay, params.detuning, params.input_coupling);
    let den = k * k + d * d - 4.0 * ki * (k - ki) * params.mode_matching;
    Ok((d * params.iota() / den).sqrt())
}

pub fn characteristic_frequencies(
    params: &CavityParams,
) -> Result<CharacteristicFrequencies, ModelError> {
    Ok(CharacteristicFrequencies {
        omega_opt: omega_opt(params)?,
        omega_dip: omega_dip(params)?,
        omega_dip_measured: omega_dip_measured(params)?,
    })
}

/// Input amplitude noise at reflection.
pub fn spectrum_ref_b1(params: &CavityParams, omega: f64) -> Result<f64, ModelError> {
    guards(params, omega)?;
    let (k, d, ki, iota) = (
        params.total_decay,
        params.detuning,
        params.input_coupling,
        params.iota(),
    );
    let x = k - 2.0 * ki;
    let w2 = omega * omega;
    let num = d * iota - (x * x + d * d) * w2;
    Ok((k * k + d * d) * num * num / (16.0 * iota * ki * (k - ki).powi(2) * d * d * w2))
}

/// Input amplitude noise at transmission.
pub fn spectrum_tra_b1(params: &CavityParams, omega: f64) -> Result<f64, ModelError> {
    guards(params, omega)?;
    let (k, d, ki, iota) = (
        params.total_decay,
        params.detuning,
        params.input_coupling,
        params.iota(),
    );
    Ok(ki * (k * k + d * d) * omega * omega / (iota * d * d))
}

/// Input phase noise, identical for both ports.
pub fn spectrum_b2(params: &CavityParams, omega: f64) -> Result<f64, ModelError> {
    guards(params, omega)?;
    let (k, d, ki, iota) = (
        params.total_decay,
        params.detuning,
        params.input_coupling,
        params.iota(),
    );
    Ok(ki * omega.powi(4) / (iota * (k * k + d * d)))
}

/// The two end-mirror vacuum terms `(d1, d2)`, identical for both ports.
pub fn spectrum_d_parts(params: &CavityParams, omega: f64) -> Result<(f64, f64), ModelError> {
    guards(params, omega)?;
    let (k, d, iota) = (params.total_decay, params.detuning, params.iota());
    let ko = params.kappa_out();
    let w2 = omega * omega;
    let num = d * iota - (k * k + d * d - 2.0 * k * ko) * w2;
    Ok((num * num / (4.0 * iota * ko * d * d * w2), ko * w2 / iota))
}

pub fn spectrum_d(params: &CavityParams, omega: f64) -> Result<f64, ModelError> {
    spectrum_d_parts(params, omega).map(|(a, b)| a + b)
}

/// All closed-form components at one frequency, with the epsilon-weighted total.
pub fn closed_form_spectrum(
    params: &CavityParams,
    omega: f64,
    port: Port,
) -> Result<NormalizedSpectrum, ModelError> {
    let b1 = match port {
        Port::Reflection => spectrum_ref_b1(params, omega)?,
        Port::Transmission => spectrum_tra_b1(params, omega)?,
    };
    let b2 = spectrum_b2(params, omega)?;
    let (d1, d2) = spectrum_d_parts(params, omega)?;
    Ok(NormalizedSpectrum::weighted(
        b1,
        b2,
        d1,
        d2,
        params.rin_amplitude,
        params.rin_phase,
    ))
}

/// `eps1 S_b1 + eps2 S_b2 + S_d` for the chosen port.
pub fn total_spectrum(params: &CavityParams, omega: f64, port: Port) -> Result<f64, ModelError> {
    closed_form_spectrum(params, omega, port).map(|s| s.total)
}

/// Relative shot-noise level of laser frequency noise `s_freq` [(rad/s)^2/Hz]
/// seen as input phase noise: `2 P_in S_freq / (hbar omega0 omega^2)`.
pub fn epsilon2_from_frequency_noise(
    input_power: f64,
    omega0: f64,
    s_freq: f64,
    omega: f64,
) -> f64 {
    2.0 * input_power * s_freq / (HBAR * omega0 * omega * omega)
}

/// Mirror displacement spectrum [m^2/Hz] driven by laser frequency noise
/// through the input phase quadrature: `chi_m^2 eps2 S_b2 S_SQL`.
pub fn frequency_noise_displacement(
    params: &CavityParams,
    s_freq: f64,
    omega: f64,
) -> Result<f64, ModelError> {
    let eps2 = epsilon2_from_frequency_noise(
        params.resolved_input_power(),
        params.omega0(),
        s_freq,
        omega,
    );
    let chi = mechanical_susceptibility(params.mirror_mass, omega);
    let sql = crate::noise::standard_quantum_limit(params.mirror_mass, omega);
    Ok(chi * chi * eps2 * spectrum_b2(params, omega)? * sql)
}

fn transfer_unchecked(params: &CavityParams, omega: f64) -> f64 {
    let (k, d, ki, iota) = (
        params.total_decay,
        params.detuning,
        params.input_coupling,
        params.iota(),
    );
    let eta = params.mode_matching;
    let w2 = omega * omega;
    let x = k - 2.0 * ki;
    let matched = d * iota - (x * x + d * d) * w2;
    let spring = d * iota - (k * k + d * d) * w2;
    eta * matched / spring + (1.0 - eta)
}

/// Reflected-power fluctuation per unit input power fluctuation, normalized
/// to 1 at DC: `eta (Delta iota - [(kappa-2kappa_in)^2+Delta^2] w^2) / (Delta iota - (kappa^2+Delta^2) w^2) + (1 - eta)`.
/// Only the location of its zero is physically meaningful.
pub fn mode_mismatch_transfer(params: &CavityParams, omega: f64) -> Result<f64, ModelError> {
    spring_guard(params)?;
    let (k, d) = (params.total_decay, params.detuning);
    let spring = d * params.iota() - (k * k + d * d) * omega * omega;
    let relative = spring.abs() / (d * params.iota());
    if relative < 1e-12 {
        return Err(ModelError::PoleAtOpticalSpring { omega, relative });
    }
    Ok(transfer_unchecked(params, omega))
}

/// Dip frequency found as the zero of [`mode_mismatch_transfer`] by bisection
/// between the optical spring and the perfectly matched dip.
pub fn omega_dip_measured_by_root(params: &CavityParams) -> Result<f64, ModelError> {
    let w_opt = omega_opt(params)?;
    let w_dip = omega_dip(params)?;
    if params.mode_matching == 0.0 {
        return Err(ModelError::NoTransferZero);
    }
    if params.mode_matching == 1.0 || w_dip == w_opt {
        return Ok(w_dip);
    }
    // Just above the pole the matched term diverges to -inf; at w_dip it is zero.
    let lo = w_opt * (1.0 + 1e-12);
    crate::optimize::bisect(|w| transfer_unchecked(params, w), lo, w_dip, 0.0, 400)
        .ok_or(ModelError::NoTransferZero)
}
