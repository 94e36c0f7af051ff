//! Seeded synthetic data for exercising the fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{dip_model, ratio_model, DipParams, FitError, MeasuredSpectrum, RatioPoint};
use crate::constants::hz_to_rad;

/// Dip spectrum on `freq_hz` with multiplicative Gaussian noise of relative
/// size `rel_noise`.
pub fn dip_spectrum(
    truth: &DipParams,
    freq_hz: &[f64],
    rel_noise: f64,
    seed: u64,
) -> Result<MeasuredSpectrum, FitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let asd = freq_hz
        .iter()
        .map(|&f| {
            let m = dip_model(
                truth.omega_dip_m,
                truth.delta_omega,
                truth.overall,
                hz_to_rad(f),
            )?;
            let z: f64 = StandardNormal.sample(&mut rng);
            Ok((m * (1.0 + rel_noise * z)).abs())
        })
        .collect::<Result<Vec<_>, FitError>>()?;
    MeasuredSpectrum::new(freq_hz.to_vec(), asd, None)
}

/// Ratio points at the given detunings [rad/s]. Each point carries
/// `sigma = rel_noise * ratio` (1% when noiseless).
pub fn ratio_points(
    detunings: &[f64],
    kappa: f64,
    kappa_in_over_kappa: f64,
    eta: f64,
    rel_noise: f64,
    seed: u64,
) -> Result<Vec<RatioPoint>, FitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rel_sigma = if rel_noise > 0.0 { rel_noise } else { 0.01 };
    detunings
        .iter()
        .map(|&d| {
            let r = ratio_model(d, kappa, kappa_in_over_kappa, eta)?;
            let z: f64 = StandardNormal.sample(&mut rng);
            Ok(RatioPoint {
                detuning: d,
                ratio: r * (1.0 + rel_noise * z),
                sigma: rel_sigma * r,
            })
        })
        .collect()
}
