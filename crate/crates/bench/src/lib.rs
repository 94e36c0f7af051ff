//! Shared inputs for the benchmarks.

use std::f64::consts::TAU;

use optodip::fit::{synth, DipParams, MeasuredSpectrum};
use optodip::FrequencyGrid;

/// 500-point log grid over the low-frequency band.
pub fn low_band_grid() -> FrequencyGrid {
    FrequencyGrid::log(10.0, 5e3, 500).expect("valid grid")
}

/// Noisy dip spectrum around 1180 Hz with 70 Hz jitter.
pub fn dip_fixture(seed: u64) -> MeasuredSpectrum {
    let truth = DipParams {
        omega_dip_m: TAU * 1180.0,
        delta_omega: TAU * 70.0,
        overall: 1.0,
    };
    let freq: Vec<f64> = (0..301)
        .map(|i| 700.0 + i as f64 * 1000.0 / 300.0)
        .collect();
    synth::dip_spectrum(&truth, &freq, 0.01, seed).expect("valid fixture")
}
