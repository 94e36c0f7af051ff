//! Exact frequency-domain two-photon engine.
//!
//! Fields are quadrature pairs `(amplitude, phase)`. The cavity gain `G`, the
//! radiation-pressure loop `A = [[0, 0], [-kappa0, 0]] G` and the closed-loop
//! response `H = G (I - A)^-1` are evaluated without any expansion in
//! `omega / kappa` or `omega_opt / kappa`. Input-output relations:
//!
//! * reflection: `c = R_alpha { [t_in^2 H - r_in I] R_beta b + t_in t_out H d + 2 chi_m A k0 t_in H (0, dF) }`
//! * transmission: `e = [t_out^2 H - r_out I] d + t_in t_out H R_beta b + 2 chi_m A k0 t_out H (0, dF)`
//!
//! The vacuum entering through the end mirror carries no carrier, so it is
//! not rotated; the transmitted carrier has the intracavity phase, so the
//! transmission output is not rotated either.
//!
//! Spectra are single-sided with unit vacuum quadrature spectral density.

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::ModelError;
use crate::matrix::{TwoPhotonMatrix, C64};
use crate::noise::{standard_quantum_limit, NormalizedSpectrum, Port};
use crate::params::CavityParams;

/// Mirror amplitude reflectivities used in the input-output relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorReflectivity {
    /// `r = 1`, consistent with the high-finesse cavity gain matrix where
    /// `t_in^2 c / (2L) = 2 kappa_in`.
    #[default]
    Unity,
    /// `r = sqrt(1 - t^2)`. Breaks the exact DC phase-to-amplitude
    /// cancellation at order `t^2`.
    Lossless,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    /// Evaluation fails with [`ModelError::PoleAtOpticalSpring`] when
    /// `|M| < pole_floor * omega^2 (kappa^2 + Delta^2)`.
    pub pole_floor: f64,
    pub reflectivity: MirrorReflectivity,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            pole_floor: 1e-12,
            reflectivity: MirrorReflectivity::Unity,
        }
    }
}

/// Cavity amplification
/// `G = c/(2L) [(kappa - i omega)^2 + Delta^2]^-1 [[kappa - i omega, -Delta], [Delta, kappa - i omega]]`.
pub fn cavity_gain(params: &CavityParams, omega: f64) -> TwoPhotonMatrix {
    let k = C64::new(params.total_decay, -omega);
    let delta = C64::from(params.detuning);
    let pref = C64::from(SPEED_OF_LIGHT / (2.0 * params.cavity_length)) / (k * k + delta * delta);
    TwoPhotonMatrix::new(k, -delta, delta, k).scale(pref)
}

/// Free-mass displacement response `-1 / (m omega^2)`.
pub fn mechanical_susceptibility(mass: f64, omega: f64) -> f64 {
    -1.0 / (mass * omega * omega)
}

/// Open radiation-pressure loop `A = [[0, 0], [-kappa0, 0]] G` with
/// `kappa0 = -8 chi_m P k0 / c`.
pub fn loop_gain(params: &CavityParams, omega: f64) -> TwoPhotonMatrix {
    let k0 = params.omega0() / SPEED_OF_LIGHT;
    let chi_m = mechanical_susceptibility(params.mirror_mass, omega);
    let kappa0 = -8.0 * chi_m * params.intracavity_power * k0 / SPEED_OF_LIGHT;
    TwoPhotonMatrix::from_real(0.0, 0.0, -kappa0, 0.0) * cavity_gain(params, omega)
}

/// `M = omega^2 [(omega + i kappa)^2 - Delta^2] + Delta iota` for explicit
/// model constants.
pub fn loop_denominator_raw(omega: f64, kappa: f64, detuning: f64, iota: f64) -> C64 {
    let w = C64::new(omega, kappa);
    (w * w - detuning * detuning) * (omega * omega) + detuning * iota
}

pub fn loop_denominator(params: &CavityParams, omega: f64) -> C64 {
    loop_denominator_raw(omega, params.total_decay, params.detuning, params.iota())
}

fn check_frequency(
    params: &CavityParams,
    omega: f64,
    opts: &EngineOptions,
) -> Result<C64, ModelError> {
    if omega == 0.0 {
        return Err(ModelError::ZeroFrequency);
    }
    let m = loop_denominator(params, omega);
    let scale = omega * omega * (params.total_decay.powi(2) + params.detuning.powi(2));
    let relative = m.norm() / scale;
    if relative < opts.pole_floor {
        return Err(ModelError::PoleAtOpticalSpring { omega, relative });
    }
    Ok(m)
}

/// Closed-loop cavity response from its closed form
/// `H = -(c omega^2)/(2 L M) [[kappa - i omega, -Delta], [Delta - iota/omega^2, kappa - i omega]]`.
pub fn closed_loop(
    params: &CavityParams,
    omega: f64,
    opts: &EngineOptions,
) -> Result<TwoPhotonMatrix, ModelError> {
    let m = check_frequency(params, omega, opts)?;
    let k = C64::new(params.total_decay, -omega);
    let delta = params.detuning;
    let pref = -(SPEED_OF_LIGHT * omega * omega) / (2.0 * params.cavity_length * m);
    let lower = delta - params.iota() / (omega * omega);
    Ok(TwoPhotonMatrix::new(k, (-delta).into(), lower.into(), k).scale(pref))
}

/// Closed-loop response built as `G (I - A)^-1` from the loop gain.
pub fn closed_loop_from_loop_gain(
    params: &CavityParams,
    omega: f64,
    opts: &EngineOptions,
) -> Result<TwoPhotonMatrix, ModelError> {
    let m = check_frequency(params, omega, opts)?;
    let g = cavity_gain(params, omega);
    let a = loop_gain(params, omega);
    let inv =
        (TwoPhotonMatrix::IDENTITY - a)
            .try_inverse()
            .ok_or(ModelError::PoleAtOpticalSpring {
                omega,
                relative: m.norm(),
            })?;
    Ok(g * inv)
}

/// Full linear map from the input fields to one output port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortResponse {
    pub port: Port,
    pub omega: f64,
    /// Input-light quadratures `b` to the output quadratures.
    pub input: TwoPhotonMatrix,
    /// End-mirror vacuum `d` to the output quadratures.
    pub vacuum: TwoPhotonMatrix,
    /// External force `dF` [N] to the output quadratures.
    pub force: [C64; 2],
}

pub fn port_response(
    params: &CavityParams,
    omega: f64,
    port: Port,
    opts: &EngineOptions,
) -> Result<PortResponse, ModelError> {
    let d = params.derive();
    let h = closed_loop(params, omega, opts)?;
    let (r_in, r_out) = match opts.reflectivity {
        MirrorReflectivity::Unity => (1.0, 1.0),
        MirrorReflectivity::Lossless => (d.r_in, d.r_out),
    };
    let signal =
        2.0 * mechanical_susceptibility(params.mirror_mass, omega) * d.cavity_amplitude * d.k0;
    let one = TwoPhotonMatrix::IDENTITY;
    let rot_beta = TwoPhotonMatrix::rotation(d.beta);
    let unit_force = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

    let (input, vacuum, force) = match port {
        Port::Reflection => {
            let rot_alpha = TwoPhotonMatrix::rotation(d.alpha);
            let input = rot_alpha * (h * (d.t_in * d.t_in) - one * r_in) * rot_beta;
            let vacuum = rot_alpha * h * (d.t_in * d.t_out);
            let force = (rot_alpha * h * (signal * d.t_in)).apply(unit_force);
            (input, vacuum, force)
        }
        Port::Transmission => {
            let input = h * rot_beta * (d.t_in * d.t_out);
            let vacuum = h * (d.t_out * d.t_out) - one * r_out;
            let force = (h * (signal * d.t_out)).apply(unit_force);
            (input, vacuum, force)
        }
    };
    Ok(PortResponse {
        port,
        omega,
        input,
        vacuum,
        force,
    })
}

/// Amplitude-quadrature output written as `chi (dF + xi_b1 b1 + xi_b2 b2 + xi_d1 d1 + xi_d2 d2)`.
/// For transmission the `xi_*` fields hold the transmission coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoefficients {
    pub chi_signal: C64,
    pub xi_b1: C64,
    pub xi_b2: C64,
    pub xi_d1: C64,
    pub xi_d2: C64,
    pub port: Port,
    pub omega: f64,
}

impl TransferCoefficients {
    pub fn noise(&self) -> [C64; 4] {
        [self.xi_b1, self.xi_b2, self.xi_d1, self.xi_d2]
    }
}

impl PortResponse {
    /// Refers the amplitude-quadrature output back to an equivalent force.
    pub fn coefficients(&self) -> Result<TransferCoefficients, ModelError> {
        let chi = self.force[0];
        let refer = |z: C64| z / chi;
        let c = TransferCoefficients {
            chi_signal: chi,
            xi_b1: refer(self.input.m11),
            xi_b2: refer(self.input.m12),
            xi_d1: refer(self.vacuum.m11),
            xi_d2: refer(self.vacuum.m12),
            port: self.port,
            omega: self.omega,
        };
        if chi.norm() == 0.0 || !c.noise().iter().all(|z| z.is_finite()) {
            return Err(ModelError::SignalNotObservable {
                omega: self.omega,
                port: self.port,
            });
        }
        Ok(c)
    }
}

pub fn transfer_coefficients(
    params: &CavityParams,
    omega: f64,
    port: Port,
    opts: &EngineOptions,
) -> Result<TransferCoefficients, ModelError> {
    port_response(params, omega, port, opts)?.coefficients()
}

/// Force-noise spectra [N^2/Hz] per input field, with the SQL-normalized copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceNoiseSpectrum {
    pub port: Port,
    pub omega: f64,
    pub b1: f64,
    pub b2: f64,
    pub d1: f64,
    pub d2: f64,
    pub total: f64,
    /// `2 hbar m omega^2`.
    pub sql: f64,
    pub normalized: NormalizedSpectrum,
}

pub fn force_noise_spectrum_exact(
    params: &CavityParams,
    omega: f64,
    port: Port,
    opts: &EngineOptions,
) -> Result<ForceNoiseSpectrum, ModelError> {
    let c = transfer_coefficients(params, omega, port, opts)?;
    let [b1, b2, d1, d2] = c.noise().map(|z| z.norm_sqr());
    let (eps1, eps2) = (params.rin_amplitude, params.rin_phase);
    let sql = standard_quantum_limit(params.mirror_mass, omega);
    let raw = NormalizedSpectrum::weighted(b1, b2, d1, d2, eps1, eps2);
    Ok(ForceNoiseSpectrum {
        port,
        omega,
        b1,
        b2,
        d1,
        d2,
        total: raw.total,
        sql,
        normalized: NormalizedSpectrum::weighted(
            b1 / sql,
            b2 / sql,
            d1 / sql,
            d2 / sql,
            eps1,
            eps2,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz_to_rad;
    use approx::assert_relative_eq;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn gain_at_dc_on_resonance_is_scaled_identity() {
        let p = CavityParams::nominal().with_detuning(0.0);
        let g = cavity_gain(&p, 0.0);
        let s = SPEED_OF_LIGHT / (2.0 * p.cavity_length) / p.total_decay;
        let expected = TwoPhotonMatrix::IDENTITY * s;
        assert!((g - expected).max_abs() / s < 1e-15);
    }

    #[test]
    fn gain_is_hermitian_in_frequency() {
        let p = CavityParams::nominal();
        for f in [1.0, 300.0, 2.5e4, 1e6] {
            let w = hz_to_rad(f);
            let d = cavity_gain(&p, -w) - cavity_gain(&p, w).conj();
            assert!(d.max_abs() <= 1e-15 * cavity_gain(&p, w).max_abs());
        }
    }

    #[test]
    fn gain_matches_expanded_real_arithmetic() {
        // (kappa - i w)^2 + D^2 = (k^2 - w^2 + D^2) - 2 i k w, then divide by hand.
        let p = CavityParams::nominal();
        let (k, dl, w) = (p.total_decay, p.detuning, hz_to_rad(1e3));
        let (dr, di) = (k * k - w * w + dl * dl, -2.0 * k * w);
        let den = dr * dr + di * di;
        let s = SPEED_OF_LIGHT / (2.0 * p.cavity_length);
        // (k - i w) / (dr + i di)
        let diag = C64::new(s * (k * dr - w * di) / den, s * (-w * dr - k * di) / den);
        let off = C64::new(s * dl * dr / den, -s * dl * di / den);
        let g = cavity_gain(&p, w);
        assert!(rel(g.m11, diag) < 1e-14);
        assert!(rel(g.m22, diag) < 1e-14);
        assert!(rel(g.m21, off) < 1e-14);
        assert!(rel(g.m12, -off) < 1e-14);
    }

    #[test]
    fn denominator_without_coupling() {
        let (w, k, d) = (1234.5, 1.5e6, 9e5);
        let m = loop_denominator_raw(w, k, d, 0.0);
        let direct = (C64::new(w, k) * C64::new(w, k) - d * d) * (w * w);
        assert!(rel(m, direct) < 1e-15);
    }

    #[test]
    fn closed_loop_routes_agree_at_nominal() {
        let p = CavityParams::nominal();
        let o = EngineOptions::default();
        for f in [10.0, 406.0, 563.0, 5e3, 1e5] {
            let w = hz_to_rad(f);
            let a = closed_loop(&p, w, &o).unwrap();
            let b = closed_loop_from_loop_gain(&p, w, &o).unwrap();
            assert!((a - b).max_abs() / a.max_abs() < 1e-10, "f = {f}");
            assert_eq!(a.m11, a.m22);
        }
    }

    #[test]
    fn closed_loop_without_coupling_is_scaled_gain() {
        let mut p = CavityParams::nominal();
        p.mirror_mass = 1e30;
        let w = hz_to_rad(700.0);
        let h = closed_loop(&p, w, &EngineOptions::default()).unwrap();
        let m = loop_denominator_raw(w, p.total_decay, p.detuning, 0.0);
        let k = C64::new(p.total_decay, -w);
        let pref = -(SPEED_OF_LIGHT * w * w) / (2.0 * p.cavity_length * m);
        let expected =
            TwoPhotonMatrix::new(k, (-p.detuning).into(), p.detuning.into(), k).scale(pref);
        assert!((h - expected).max_abs() / h.max_abs() < 1e-9);
    }

    #[test]
    fn zero_frequency_and_pole_are_errors() {
        let p = CavityParams::nominal();
        let o = EngineOptions::default();
        assert_eq!(closed_loop(&p, 0.0, &o), Err(ModelError::ZeroFrequency));
        let mut loose = o;
        loose.pole_floor = 1e-2;
        let w_opt = (p.detuning * p.iota() / (p.total_decay.powi(2) + p.detuning.powi(2))).sqrt();
        assert!(matches!(
            closed_loop(&p, w_opt, &loose),
            Err(ModelError::PoleAtOpticalSpring { .. })
        ));
    }

    /// Coefficients written out as explicit scalar expressions of H entries.
    fn explicit_reflection(p: &CavityParams, w: f64) -> [C64; 5] {
        let d = p.derive();
        let h = closed_loop(p, w, &EngineOptions::default()).unwrap();
        let (h11, h12, h21) = (h.m11, h.m12, h.m21);
        let (sa, ca) = d.alpha.sin_cos();
        let (sb, cb) = d.beta.sin_cos();
        let (sg, cg) = d.gamma.sin_cos();
        let s = 2.0 * mechanical_susceptibility(p.mirror_mass, w) * d.cavity_amplitude * d.k0;
        let t2 = d.t_in * d.t_in;
        let chi = (h12 * ca - h11 * sa) * (s * d.t_in);
        let xb1 = ((h11 * cg + h12 * ca * sb - h21 * sa * cb) * t2 - cg) / chi;
        let xb2 = ((-h11 * sg + h12 * ca * cb + h21 * sa * sb) * t2 + sg) / chi;
        let xd1 = (h11 * ca - h21 * sa) / (h12 * ca - h11 * sa) * (d.t_out / s);
        let xd2 = C64::from(d.t_out / s);
        [chi, xb1, xb2, xd1, xd2]
    }

    fn explicit_transmission(p: &CavityParams, w: f64) -> [C64; 5] {
        let d = p.derive();
        let h = closed_loop(p, w, &EngineOptions::default()).unwrap();
        let (h11, h12) = (h.m11, h.m12);
        let (sb, cb) = d.beta.sin_cos();
        let s = 2.0 * mechanical_susceptibility(p.mirror_mass, w) * d.cavity_amplitude * d.k0;
        let chi = h12 * (s * d.t_out);
        let eb1 = (h11 * cb + h12 * sb) / h12 * (d.t_in / s);
        let eb2 = (-h11 * sb + h12 * cb) / h12 * (d.t_in / s);
        let ed1 = (h11 * (d.t_out * d.t_out) - 1.0) / chi;
        let ed2 = C64::from(d.t_out / s);
        [chi, eb1, eb2, ed1, ed2]
    }

    #[test]
    fn matrix_route_matches_explicit_coefficients() {
        let o = EngineOptions::default();
        for p in [CavityParams::nominal(), CavityParams::experiment()] {
            for f in [20.0, 480.0, 3e3, 4e4] {
                let w = hz_to_rad(f);
                for (port, want) in [
                    (Port::Reflection, explicit_reflection(&p, w)),
                    (Port::Transmission, explicit_transmission(&p, w)),
                ] {
                    let c = transfer_coefficients(&p, w, port, &o).unwrap();
                    let got = [c.chi_signal, c.xi_b1, c.xi_b2, c.xi_d1, c.xi_d2];
                    for (g, e) in got.iter().zip(want) {
                        // low-frequency cancellation costs a few digits
                        assert!(rel(*g, e) < 1e-7, "{port} f={f}: {g} vs {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn end_mirror_phase_coefficient_identity() {
        let p = CavityParams::nominal();
        let d = p.derive();
        let w = hz_to_rad(250.0);
        let expected = d.t_out
            / (2.0 * mechanical_susceptibility(p.mirror_mass, w) * d.cavity_amplitude * d.k0);
        for port in [Port::Reflection, Port::Transmission] {
            let c = transfer_coefficients(&p, w, port, &EngineOptions::default()).unwrap();
            assert!(rel(c.xi_d2, expected.into()) < 1e-12);
        }
    }

    #[test]
    fn bare_cavity_reflection_on_resonance() {
        // No radiation pressure, no detuning: b1 -> c1 is 2 kappa_in/(kappa - i w) - 1.
        let mut p = CavityParams::nominal().with_detuning(0.0);
        p.mirror_mass = 1e40;
        let o = EngineOptions::default();
        for f in [100.0, 5e4, 3e5] {
            let w = hz_to_rad(f);
            let r = port_response(&p, w, Port::Reflection, &o).unwrap();
            let bare = C64::from(2.0 * p.input_coupling) / C64::new(p.total_decay, -w) - 1.0;
            assert_relative_eq!(r.input.m11.norm(), bare.norm(), max_relative = 1e-9);
            // no signal reaches the amplitude quadrature without detuning
            assert!(matches!(
                r.coefficients(),
                Err(ModelError::SignalNotObservable { .. })
            ));
        }
    }

    #[test]
    fn total_is_weighted_sum() {
        let mut p = CavityParams::nominal();
        p.rin_amplitude = 3.0;
        p.rin_phase = 0.5;
        let s = force_noise_spectrum_exact(
            &p,
            hz_to_rad(800.0),
            Port::Reflection,
            &EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(s.total, 3.0 * s.b1 + 0.5 * s.b2 + s.d1 + s.d2);
        assert_relative_eq!(s.normalized.total, s.total / s.sql, max_relative = 1e-14);
    }

    #[test]
    fn lossless_reflectivity_spoils_phase_cancellation() {
        let p = CavityParams::nominal();
        let w = hz_to_rad(10.0);
        let unity =
            force_noise_spectrum_exact(&p, w, Port::Reflection, &EngineOptions::default()).unwrap();
        let lossless = EngineOptions {
            reflectivity: MirrorReflectivity::Lossless,
            ..EngineOptions::default()
        };
        let lossy = force_noise_spectrum_exact(&p, w, Port::Reflection, &lossless).unwrap();
        assert!(lossy.normalized.b2 > 1e6 * unity.normalized.b2);
    }
}
