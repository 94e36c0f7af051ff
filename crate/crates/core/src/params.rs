//! Physical description of the cavity, the suspended mirror and the input light.
//!
//! [`CavityParams`] is the single place where every symbol used by the noise
//! models lives. Everything that follows from it (carrier frequency, coupling
//! strength `iota`, mirror transmissivities, carrier phase angles) is computed
//! once by [`CavityParams::derive`].
//!
//! Conventions:
//! * `total_decay` (kappa) is the amplitude half-width in angular frequency,
//!   `kappa = (t_in^2 + t_out^2) c / (4 L)`.
//! * `detuning` (Delta) is positive on the blue side, where the optical spring
//!   is restoring.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{hz_to_rad, HBAR, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("wavelength must be positive and finite")]
    NonPositiveWavelength,
    #[error("cavity length must be positive and finite")]
    NonPositiveLength,
    #[error("mirror mass must be positive and finite")]
    NonPositiveMass,
    #[error("total decay rate kappa must be positive and finite")]
    NonPositiveDecay,
    #[error("input coupling kappa_in must be positive and finite")]
    NonPositiveCoupling,
    #[error("input coupling kappa_in must be strictly below the total decay rate kappa")]
    OvercoupledExceedsTotal,
    #[error("detuning must be finite")]
    NonFiniteDetuning,
    #[error("detuning must be positive (blue side) for optical-spring dependent quantities")]
    NonPositiveDetuning,
    #[error("intracavity power must be positive and finite")]
    NonPositivePower,
    #[error("input power must be positive and finite")]
    NonPositiveInputPower,
    #[error("mode matching must lie in [0, 1]")]
    ModeMatchingOutOfRange,
    #[error("relative amplitude noise level must be non-negative")]
    NegativeRinAmplitude,
    #[error("relative phase noise level must be non-negative")]
    NegativeRinPhase,
    #[error("finesse must be positive and finite")]
    NonPositiveFinesse,
    #[error("mirror power transmissivity 4 L kappa / c must be below 1")]
    TransmissivityExceedsUnity,
}

/// Cavity, oscillator and input light (SI units, angular rates in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Carrier wavelength [m].
    pub wavelength: f64,
    /// Cavity length [m].
    pub cavity_length: f64,
    /// Effective mass of the movable end mirror [kg].
    pub mirror_mass: f64,
    /// Total amplitude decay rate kappa [rad/s].
    pub total_decay: f64,
    /// Input-coupler contribution kappa_in [rad/s].
    pub input_coupling: f64,
    /// Cavity detuning Delta [rad/s], positive = blue.
    pub detuning: f64,
    /// Intracavity power P [W].
    pub intracavity_power: f64,
    /// Overlap eta of the input beam with the cavity TEM00 mode.
    pub mode_matching: f64,
    /// Input amplitude-quadrature noise relative to vacuum (epsilon_1).
    pub rin_amplitude: f64,
    /// Input phase-quadrature noise relative to vacuum (epsilon_2).
    pub rin_phase: f64,
    /// Input power when the parameters were specified through it. When set,
    /// the `with_*` modifiers that change kappa, kappa_in or Delta re-resolve
    /// the intracavity power at fixed input power.
    pub input_power: Option<f64>,
}

/// Quantities that follow from [`CavityParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Carrier angular frequency [rad/s].
    pub omega0: f64,
    /// Carrier wavenumber [1/m].
    pub k0: f64,
    /// Intracavity field amplitude sqrt(2P/(hbar omega0)) [1/sqrt(s)].
    pub cavity_amplitude: f64,
    /// Optomechanical coupling 4 P k0 / (m L) [1/s^3].
    pub iota: f64,
    /// End-mirror decay rate kappa - kappa_in [rad/s].
    pub kappa_out: f64,
    pub t_in: f64,
    pub t_out: f64,
    pub r_in: f64,
    pub r_out: f64,
    /// Carrier phase from intracavity to reflected field [rad].
    pub alpha: f64,
    /// Carrier phase from input to intracavity field [rad].
    pub beta: f64,
    /// Carrier phase from input to reflected field, `alpha + beta` [rad].
    pub gamma: f64,
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl CavityParams {
    /// Parameter set of the theoretical noise-budget example: 1064 nm,
    /// L = 10 cm, m = 10 mg, kappa/2pi = 0.25 MHz, kappa_in = 0.8 kappa,
    /// Delta = kappa/sqrt(3), P = 1 W, vacuum-level input noise.
    pub fn nominal() -> Self {
        let kappa = hz_to_rad(0.25e6);
        CavityParams {
            wavelength: 1064e-9,
            cavity_length: 0.1,
            mirror_mass: 10e-6,
            total_decay: kappa,
            input_coupling: 0.8 * kappa,
            detuning: kappa / 3f64.sqrt(),
            intracavity_power: 1.0,
            mode_matching: 1.0,
            rin_amplitude: 1.0,
            rin_phase: 1.0,
            input_power: None,
        }
    }

    /// Bench-top cavity: 11 cm, 8 mg mirror, finesse 3.0e3, 4.7 mW input,
    /// 92 % mode matching, kappa_in/kappa = 0.81, Delta = kappa/sqrt(3)
    /// (intracavity power near 5 W).
    pub fn experiment() -> Self {
        let length = 0.11;
        let kappa = finesse_to_kappa(3.0e3, length).expect("constant finesse and length are valid");
        let mut p = CavityParams {
            wavelength: 1064e-9,
            cavity_length: length,
            mirror_mass: 8e-6,
            total_decay: kappa,
            input_coupling: 0.81 * kappa,
            detuning: kappa / 3f64.sqrt(),
            intracavity_power: 1.0,
            mode_matching: 0.92,
            rin_amplitude: 1.0,
            rin_phase: 1.0,
            input_power: None,
        };
        p = p.with_input_power(4.7e-3);
        p
    }

    /// Looks up a named preset (`nominal` or `experiment`).
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "nominal" => Some(Self::nominal()),
            "experiment" => Some(Self::experiment()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 2] = ["nominal", "experiment"];

    /// Returns the parameters unchanged if every storage invariant holds,
    /// otherwise the first violated one. A zero or negative detuning is
    /// accepted here; see [`CavityParams::require_spring`].
    pub fn validate(self) -> Result<Self, ParamsError> {
        if !positive(self.wavelength) {
            return Err(ParamsError::NonPositiveWavelength);
        }
        if !positive(self.cavity_length) {
            return Err(ParamsError::NonPositiveLength);
        }
        if !positive(self.mirror_mass) {
            return Err(ParamsError::NonPositiveMass);
        }
        if !positive(self.total_decay) {
            return Err(ParamsError::NonPositiveDecay);
        }
        if !positive(self.input_coupling) {
            return Err(ParamsError::NonPositiveCoupling);
        }
        if self.input_coupling >= self.total_decay {
            return Err(ParamsError::OvercoupledExceedsTotal);
        }
        if !self.detuning.is_finite() {
            return Err(ParamsError::NonFiniteDetuning);
        }
        if !positive(self.intracavity_power) {
            return Err(ParamsError::NonPositivePower);
        }
        if let Some(p_in) = self.input_power {
            if !positive(p_in) {
                return Err(ParamsError::NonPositiveInputPower);
            }
        }
        if !(0.0..=1.0).contains(&self.mode_matching) {
            return Err(ParamsError::ModeMatchingOutOfRange);
        }
        if !(self.rin_amplitude >= 0.0 && self.rin_amplitude.is_finite()) {
            return Err(ParamsError::NegativeRinAmplitude);
        }
        if !(self.rin_phase >= 0.0 && self.rin_phase.is_finite()) {
            return Err(ParamsError::NegativeRinPhase);
        }
        if 4.0 * self.cavity_length * self.total_decay / SPEED_OF_LIGHT >= 1.0 {
            return Err(ParamsError::TransmissivityExceedsUnity);
        }
        Ok(self)
    }

    /// Whether the optical spring exists (Delta > 0).
    pub fn spring_available(&self) -> bool {
        self.detuning > 0.0
    }

    pub fn require_spring(&self) -> Result<(), ParamsError> {
        if self.spring_available() {
            Ok(())
        } else {
            Err(ParamsError::NonPositiveDetuning)
        }
    }

    pub fn kappa_out(&self) -> f64 {
        self.total_decay - self.input_coupling
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// 4 P k0 / (m L).
    pub fn iota(&self) -> f64 {
        let k0 = self.omega0() / SPEED_OF_LIGHT;
        4.0 * self.intracavity_power * k0 / (self.mirror_mass * self.cavity_length)
    }

    pub fn derive(&self) -> DerivedQuantities {
        let kappa = self.total_decay;
        let kappa_in = self.input_coupling;
        let delta = self.detuning;
        let omega0 = self.omega0();
        let k0 = omega0 / SPEED_OF_LIGHT;
        let kappa_out = kappa - kappa_in;

        let t_in2 = 4.0 * self.cavity_length * kappa_in / SPEED_OF_LIGHT;
        let t_out2 = 4.0 * self.cavity_length * kappa_out / SPEED_OF_LIGHT;

        let beta = (-delta).atan2(kappa);
        let alpha_den = 2.0 * kappa_in - kappa;
        // Critically coupled and on resonance: no reflected carrier, phase is a convention.
        let alpha = if delta == 0.0 && alpha_den == 0.0 {
            FRAC_PI_2
        } else {
            (-delta).atan2(alpha_den)
        };

        DerivedQuantities {
            omega0,
            k0,
            cavity_amplitude: (2.0 * self.intracavity_power / (HBAR * omega0)).sqrt(),
            iota: self.iota(),
            kappa_out,
            t_in: t_in2.sqrt(),
            t_out: t_out2.sqrt(),
            r_in: (1.0 - t_in2).sqrt(),
            r_out: (1.0 - t_out2).sqrt(),
            alpha,
            beta,
            gamma: alpha + beta,
        }
    }

    /// Input power that produces the current intracavity power.
    pub fn resolved_input_power(&self) -> f64 {
        self.input_power
            .unwrap_or_else(|| input_power_for(self.intracavity_power, self))
    }

    /// Sets the input power and resolves the intracavity power from it.
    pub fn with_input_power(mut self, input_power: f64) -> Self {
        self.input_power = Some(input_power);
        self.intracavity_power = intracavity_power(input_power, &self);
        self
    }

    /// Sets the intracavity power directly, dropping any input-power link.
    pub fn with_intracavity_power(mut self, power: f64) -> Self {
        self.input_power = None;
        self.intracavity_power = power;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self.reresolve()
    }

    pub fn with_input_coupling(mut self, input_coupling: f64) -> Self {
        self.input_coupling = input_coupling;
        self.reresolve()
    }

    pub fn with_mode_matching(mut self, eta: f64) -> Self {
        self.mode_matching = eta;
        self
    }

    fn reresolve(self) -> Self {
        match self.input_power {
            Some(p_in) => self.with_input_power(p_in),
            None => self,
        }
    }
}

/// kappa = pi c / (2 L F): half-width in angular frequency for a cavity of
/// the given finesse, consistent with `t_in^2 + t_out^2 = 2 pi / F`.
pub fn finesse_to_kappa(finesse: f64, cavity_length: f64) -> Result<f64, ParamsError> {
    if !positive(finesse) {
        return Err(ParamsError::NonPositiveFinesse);
    }
    if !positive(cavity_length) {
        return Err(ParamsError::NonPositiveLength);
    }
    Ok(PI * SPEED_OF_LIGHT / (2.0 * cavity_length * finesse))
}

/// Inverse of [`finesse_to_kappa`].
pub fn kappa_to_finesse(kappa: f64, cavity_length: f64) -> Result<f64, ParamsError> {
    if !positive(kappa) {
        return Err(ParamsError::NonPositiveDecay);
    }
    if !positive(cavity_length) {
        return Err(ParamsError::NonPositiveLength);
    }
    Ok(PI * SPEED_OF_LIGHT / (2.0 * cavity_length * kappa))
}

/// Intracavity power for a given input power:
/// `P = c kappa_in P_in / (L (kappa^2 + Delta^2))`.
pub fn intracavity_power(input_power: f64, params: &CavityParams) -> f64 {
    let kappa = params.total_decay;
    let delta = params.detuning;
    SPEED_OF_LIGHT * params.input_coupling * input_power
        / (params.cavity_length * (kappa * kappa + delta * delta))
}

/// Input power needed for a given intracavity power (inverse of
/// [`intracavity_power`]).
pub fn input_power_for(intracavity: f64, params: &CavityParams) -> f64 {
    let kappa = params.total_decay;
    let delta = params.detuning;
    intracavity * params.cavity_length * (kappa * kappa + delta * delta)
        / (SPEED_OF_LIGHT * params.input_coupling)
}
