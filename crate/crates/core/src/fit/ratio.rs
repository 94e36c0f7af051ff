use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::FitError;
use crate::constants::{hz_to_rad, rad_to_hz};
use crate::optimize::brent_minimize;

/// Optical-spring to measured-dip frequency ratio. Independent of the
/// intracavity power.
pub fn ratio_model(
    detuning: f64,
    kappa: f64,
    kappa_in_over_kappa: f64,
    eta: f64,
) -> Result<f64, FitError> {
    if !(kappa > 0.0 && kappa.is_finite() && detuning.is_finite()) {
        return Err(FitError::InvalidModelParams(
            "kappa must be positive and detuning finite",
        ));
    }
    if !(0.0..=1.0).contains(&kappa_in_over_kappa) || !(0.0..=1.0).contains(&eta) {
        return Err(FitError::InvalidModelParams(
            "kappa_in/kappa and eta must lie in [0, 1]",
        ));
    }
    let x = kappa_in_over_kappa;
    let k2d2 = kappa * kappa + detuning * detuning;
    Ok((1.0 - 4.0 * x * (1.0 - x) * eta * kappa * kappa / k2d2).sqrt())
}

fn check_powers(p_measured: f64, p_max: f64, kappa: f64) -> Result<(), FitError> {
    if !(p_measured > 0.0 && p_max > 0.0) {
        return Err(FitError::NonPositivePower);
    }
    if p_measured > p_max {
        return Err(FitError::MeasuredExceedsMax);
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(FitError::InvalidModelParams("kappa must be positive"));
    }
    Ok(())
}

/// Detuning from the transmitted power relative to the resonant maximum,
/// `kappa * sqrt(p_max / p - 1)`.
pub fn detuning_from_transmission(
    p_measured: f64,
    p_max: f64,
    kappa: f64,
) -> Result<f64, FitError> {
    check_powers(p_measured, p_max, kappa)?;
    Ok(kappa * (p_max / p_measured - 1.0).max(0.0).sqrt())
}

/// First-order propagation of a power uncertainty into the detuning. Infinite
/// on resonance, where the profile is flat.
pub fn detuning_error_from_transmission(
    p_measured: f64,
    sigma_p: f64,
    p_max: f64,
    kappa: f64,
) -> Result<f64, FitError> {
    check_powers(p_measured, p_max, kappa)?;
    let q = (p_max / p_measured - 1.0).max(0.0).sqrt();
    let slope = kappa * p_max / (2.0 * q * p_measured * p_measured);
    Ok(slope * sigma_p.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    /// [rad/s]
    pub detuning: f64,
    pub ratio: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioFitOptions {
    pub lower: f64,
    pub upper: f64,
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for RatioFitOptions {
    /// The model is symmetric under `x -> 1 - x`; the search covers the
    /// branch with the input mirror dominating.
    fn default() -> Self {
        RatioFitOptions {
            lower: 0.5,
            upper: 1.0,
            xtol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioFitResult {
    pub kappa_in_over_kappa: f64,
    pub kappa_in_over_kappa_error: f64,
    /// Weighted RMS residual `sqrt(chi2 / n)`.
    pub residual_norm: f64,
    pub chi2: f64,
    pub points: usize,
    pub iterations: usize,
    /// Minimum on (or indistinguishable from) a search bound, or a flat
    /// objective.
    pub boundary_fit: bool,
}

/// Weighted least-squares estimate of kappa_in/kappa from ratio data.
pub fn fit_ratio(
    data: &[RatioPoint],
    kappa: f64,
    eta: f64,
    opts: &RatioFitOptions,
) -> Result<RatioFitResult, FitError> {
    if data.len() < 2 {
        return Err(FitError::InsufficientData {
            needed: 2,
            got: data.len(),
        });
    }
    if let Some(p) = data
        .iter()
        .find(|p| !(p.sigma > 0.0 && p.sigma.is_finite()))
    {
        return Err(FitError::InvalidData(format!(
            "non-positive ratio error {}",
            p.sigma
        )));
    }
    if data
        .iter()
        .any(|p| !(p.ratio.is_finite() && p.detuning.is_finite()))
    {
        return Err(FitError::InvalidData("non-finite ratio data".into()));
    }
    if !(0.0 <= opts.lower && opts.lower < opts.upper && opts.upper <= 1.0) {
        return Err(FitError::InvalidModelParams(
            "search bounds must satisfy 0 <= lower < upper <= 1",
        ));
    }
    ratio_model(0.0, kappa, 0.5, eta)?;

    let chi2 = |x: f64| -> f64 {
        data.iter()
            .map(|p| {
                let m = ratio_model(p.detuning, kappa, x, eta).unwrap_or(f64::NAN);
                ((p.ratio - m) / p.sigma).powi(2)
            })
            .sum()
    };

    let m = brent_minimize(chi2, opts.lower, opts.upper, opts.xtol, opts.max_iter);
    if !m.converged {
        return Err(FitError::NoConvergence {
            iterations: m.iterations,
        });
    }
    let width = opts.upper - opts.lower;
    let near_bound =
        (m.x - opts.lower).abs() < 1e-6 * width || (opts.upper - m.x).abs() < 1e-6 * width;
    let samples = [
        chi2(opts.lower),
        chi2(0.5 * (opts.lower + opts.upper)),
        chi2(opts.upper),
    ];
    let spread = samples.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - samples.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let flat = spread <= 1e-12 * m.value.abs().max(f64::MIN_POSITIVE);

    let h = 1e-4 * width;
    let x0 = m.x.clamp(opts.lower + h, opts.upper - h);
    let curvature = (chi2(x0 + h) - 2.0 * chi2(x0) + chi2(x0 - h)) / (h * h);
    let error = if curvature > 0.0 && !flat {
        (2.0 / curvature).sqrt()
    } else {
        f64::NAN
    };

    Ok(RatioFitResult {
        kappa_in_over_kappa: m.x,
        kappa_in_over_kappa_error: error,
        residual_norm: (m.value / data.len() as f64).sqrt(),
        chi2: m.value,
        points: data.len(),
        iterations: m.iterations,
        boundary_fit: near_bound || flat,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct RatioRow {
    detuning_hz: f64,
    ratio: f64,
    sigma: f64,
}

/// Reads `detuning_hz,ratio,sigma` CSV.
pub fn read_ratio_csv<R: Read>(reader: R) -> Result<Vec<RatioPoint>, FitError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    rdr.deserialize::<RatioRow>()
        .map(|row| {
            let row = row?;
            Ok(RatioPoint {
                detuning: hz_to_rad(row.detuning_hz),
                ratio: row.ratio,
                sigma: row.sigma,
            })
        })
        .collect()
}

pub fn write_ratio_csv<W: Write>(writer: W, points: &[RatioPoint]) -> Result<(), FitError> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(RatioRow {
            detuning_hz: rad_to_hz(p.detuning),
            ratio: p.ratio,
            sigma: p.sigma,
        })?;
    }
    if points.is_empty() {
        w.write_record(["detuning_hz", "ratio", "sigma"])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    #[test]
    fn ratio_limits() {
        let k = 3.0;
        assert_eq!(ratio_model(0.3, k, 0.8, 0.0).unwrap(), 1.0);
        assert!(ratio_model(1e9, k, 0.8, 0.92).unwrap() > 1.0 - 1e-12);
        assert_relative_eq!(ratio_model(0.0, k, 0.5, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            ratio_model(k / 3f64.sqrt(), k, 0.8, 0.92).unwrap(),
            (1.0f64 - 0.64 * 0.92 * 0.75).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn detuning_examples() {
        let k = TAU * 0.25e6;
        assert_eq!(detuning_from_transmission(1.0, 1.0, k).unwrap(), 0.0);
        assert_relative_eq!(
            detuning_from_transmission(0.5, 1.0, k).unwrap(),
            k,
            max_relative = 1e-15
        );
        let d = detuning_from_transmission(0.75, 1.0, k).unwrap();
        assert_relative_eq!(d / TAU, 144_337.567, max_relative = 1e-8);
        // forward Lorentzian
        assert_relative_eq!(k * k / (k * k + d * d), 0.75, max_relative = 1e-14);
        assert!(matches!(
            detuning_from_transmission(2.0, 1.0, k),
            Err(FitError::MeasuredExceedsMax)
        ));
        assert!(matches!(
            detuning_from_transmission(0.0, 1.0, k),
            Err(FitError::NonPositivePower)
        ));
    }

    #[test]
    fn detuning_error_matches_finite_difference() {
        let k = 2.0;
        let (p, pm, s) = (0.3, 1.0, 1e-3);
        let h = 1e-7;
        let fd = (detuning_from_transmission(p + h, pm, k).unwrap()
            - detuning_from_transmission(p - h, pm, k).unwrap())
            / (2.0 * h);
        assert_relative_eq!(
            detuning_error_from_transmission(p, s, pm, k).unwrap(),
            fd.abs() * s,
            max_relative = 1e-6
        );
    }

    #[test]
    fn exact_two_point_recovery_and_flags() {
        let k = 1.0;
        let pts: Vec<RatioPoint> = [0.4, 1.1]
            .iter()
            .map(|&d| RatioPoint {
                detuning: d,
                ratio: ratio_model(d, k, 0.81, 0.92).unwrap(),
                sigma: 0.01,
            })
            .collect();
        let r = fit_ratio(&pts, k, 0.92, &Default::default()).unwrap();
        assert!((r.kappa_in_over_kappa - 0.81).abs() < 1e-8, "{r:?}");
        assert!(!r.boundary_fit);

        let ones: Vec<RatioPoint> = pts
            .iter()
            .map(|p| RatioPoint { ratio: 1.0, ..*p })
            .collect();
        assert!(
            fit_ratio(&ones, k, 0.92, &Default::default())
                .unwrap()
                .boundary_fit
        );
        assert!(
            fit_ratio(&pts, k, 0.0, &Default::default())
                .unwrap()
                .boundary_fit
        );
        assert!(matches!(
            fit_ratio(&pts[..1], k, 0.92, &Default::default()),
            Err(FitError::InsufficientData { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let pts = vec![
            RatioPoint {
                detuning: TAU * 1e5,
                ratio: 0.8,
                sigma: 0.02,
            },
            RatioPoint {
                detuning: TAU * 2e5,
                ratio: 0.9,
                sigma: 0.03,
            },
        ];
        let mut buf = Vec::new();
        write_ratio_csv(&mut buf, &pts).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("detuning_hz,ratio,sigma\n"));
        let back = read_ratio_csv(buf.as_slice()).unwrap();
        for (a, b) in back.iter().zip(&pts) {
            assert_relative_eq!(a.detuning, b.detuning, max_relative = 1e-15);
            assert_eq!((a.ratio, a.sigma), (b.ratio, b.sigma));
        }
    }
}
