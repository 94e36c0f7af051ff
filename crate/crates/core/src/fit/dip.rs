use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{FitError, MeasuredSpectrum};
use crate::constants::hz_to_rad;
use crate::optimize::{hessian, nelder_mead, SimplexOptions};

/// How the Gaussian spread of the dip frequency is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterAverage {
    /// Mean of the two spectra at `omega_dip_m ± delta_omega`.
    #[default]
    TwoPoint,
    /// N-node Gauss-Hermite average over a Gaussian of standard deviation
    /// `delta_omega`.
    GaussHermite(usize),
}

/// (relative offset in units of delta_omega, normalized weight)
#[derive(Debug, Clone)]
struct Nodes(Vec<(f64, f64)>);

impl Nodes {
    fn new(avg: JitterAverage) -> Result<Self, FitError> {
        match avg {
            JitterAverage::TwoPoint => Ok(Nodes(vec![(1.0, 0.5), (-1.0, 0.5)])),
            JitterAverage::GaussHermite(n) => {
                let n = NonZeroUsize::new(n).ok_or(FitError::InvalidModelParams(
                    "Gauss-Hermite order must be positive",
                ))?;
                let rule = GaussHermite::new(n);
                let norm = std::f64::consts::PI.sqrt();
                Ok(Nodes(
                    rule.iter()
                        .map(|(x, w)| (std::f64::consts::SQRT_2 * x, w / norm))
                        .collect(),
                ))
            }
        }
    }

    fn max_offset(&self) -> f64 {
        self.0.iter().map(|n| n.0.abs()).fold(0.0, f64::max)
    }

    fn check(&self, p: &DipParams) -> Result<(), FitError> {
        if ![p.omega_dip_m, p.delta_omega, p.overall]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(FitError::InvalidModelParams("parameters must be finite"));
        }
        if p.omega_dip_m <= 0.0 || p.overall <= 0.0 {
            return Err(FitError::InvalidModelParams(
                "dip frequency and overall factor must be positive",
            ));
        }
        if p.delta_omega.abs() * self.max_offset() >= p.omega_dip_m {
            return Err(FitError::InvalidModelParams(
                "jitter must stay below the dip frequency",
            ));
        }
        Ok(())
    }

    fn eval(&self, p: &DipParams, omega: f64) -> f64 {
        let w2 = omega * omega;
        let s: f64 = self
            .0
            .iter()
            .map(|&(x, wt)| {
                let wd2 = (p.omega_dip_m + x * p.delta_omega).powi(2);
                let g = (wd2 - w2) / wd2;
                wt * g * g
            })
            .sum();
        p.overall * s.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipParams {
    /// [rad/s]
    pub omega_dip_m: f64,
    /// [rad/s]
    pub delta_omega: f64,
    pub overall: f64,
}

/// Jitter-averaged dip shape `overall * sqrt((g(w+)^2 + g(w-)^2) / 2)` with
/// `g(w_d) = |w_d^2 - w^2| / w_d^2` and `w± = omega_dip_m ± delta_omega`.
pub fn dip_model(
    omega_dip_m: f64,
    delta_omega: f64,
    overall: f64,
    omega: f64,
) -> Result<f64, FitError> {
    dip_model_averaged(
        &DipParams {
            omega_dip_m,
            delta_omega,
            overall,
        },
        omega,
        JitterAverage::TwoPoint,
    )
}

pub fn dip_model_averaged(p: &DipParams, omega: f64, avg: JitterAverage) -> Result<f64, FitError> {
    let nodes = Nodes::new(avg)?;
    nodes.check(p)?;
    Ok(nodes.eval(p, omega))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipFitOptions {
    /// Inclusive angular-frequency band [rad/s]; the whole spectrum if `None`.
    pub band: Option<(f64, f64)>,
    pub initial: Option<DipParams>,
    pub averaging: JitterAverage,
    /// Coarse scan over the dip frequency to seed the simplex when no initial
    /// guess is given.
    pub prescan: bool,
    pub simplex: SimplexOptions,
}

impl Default for DipFitOptions {
    fn default() -> Self {
        DipFitOptions {
            band: None,
            initial: None,
            averaging: JitterAverage::TwoPoint,
            prescan: true,
            simplex: SimplexOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipFitResult {
    /// [rad/s]
    pub omega_dip_m: f64,
    /// [rad/s]
    pub delta_omega: f64,
    pub overall: f64,
    pub omega_dip_m_error: f64,
    pub delta_omega_error: f64,
    pub overall_error: f64,
    /// Weighted RMS residual `sqrt(objective / n)`.
    pub residual_norm: f64,
    pub objective: f64,
    pub initial_objective: f64,
    pub points: usize,
    pub iterations: usize,
    pub initial: DipParams,
    /// Band actually used [rad/s].
    pub band: (f64, f64),
    pub averaging: JitterAverage,
}

const MIN_POINTS: usize = 10;
const PRESCAN_POINTS: usize = 81;
const MAX_RESTARTS: usize = 4;

struct Problem {
    omega: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    nodes: Nodes,
}

impl Problem {
    fn objective(&self, p: &DipParams) -> f64 {
        if self.nodes.check(p).is_err() {
            return f64::INFINITY;
        }
        self.omega
            .iter()
            .zip(&self.y)
            .zip(&self.w)
            .map(|((&om, &y), &w)| {
                let r = y - self.nodes.eval(p, om);
                w * r * r
            })
            .sum()
    }

    /// Weighted least-squares overall factor for fixed shape parameters.
    fn best_overall(&self, omega_dip_m: f64, delta_omega: f64) -> f64 {
        let unit = DipParams {
            omega_dip_m,
            delta_omega,
            overall: 1.0,
        };
        let (mut num, mut den) = (0.0, 0.0);
        for ((&om, &y), &w) in self.omega.iter().zip(&self.y).zip(&self.w) {
            let m = self.nodes.eval(&unit, om);
            num += w * y * m;
            den += w * m * m;
        }
        num / den
    }

    /// Shape seed at a trial dip frequency: the dip floor of the two-point
    /// model is about `2 delta / omega_dip_m` of the overall factor.
    fn seed_at(&self, omega_dip_m: f64, y_min: f64) -> DipParams {
        let cap = 0.5 * omega_dip_m / self.nodes.max_offset().max(1.0);
        let mut delta = 0.05 * omega_dip_m;
        let mut overall = self.best_overall(omega_dip_m, delta);
        for _ in 0..3 {
            delta = (0.5 * omega_dip_m * y_min / overall).clamp(1e-4 * omega_dip_m, cap);
            overall = self.best_overall(omega_dip_m, delta);
        }
        DipParams {
            omega_dip_m,
            delta_omega: delta,
            overall,
        }
    }
}

/// Three-parameter least-squares fit of the jitter-averaged dip model to an
/// amplitude spectrum.
pub fn fit_dip(data: &MeasuredSpectrum, opts: &DipFitOptions) -> Result<DipFitResult, FitError> {
    let (lo, hi) = opts.band.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(FitError::InvalidData("band must have lower < upper".into()));
    }
    let nodes = Nodes::new(opts.averaging)?;
    let mut prob = Problem {
        omega: vec![],
        y: vec![],
        w: vec![],
        nodes,
    };
    for (i, &f) in data.freq_hz.iter().enumerate() {
        let om = hz_to_rad(f);
        if om >= lo && om <= hi {
            prob.omega.push(om);
            prob.y.push(data.asd[i]);
            prob.w
                .push(data.sigma.as_ref().map_or(1.0, |s| 1.0 / (s[i] * s[i])));
        }
    }
    let n = prob.omega.len();
    if n < MIN_POINTS {
        return Err(FitError::InsufficientData {
            needed: MIN_POINTS,
            got: n,
        });
    }
    let i_min = prob
        .y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    if i_min == 0 || i_min == n - 1 {
        return Err(FitError::DegenerateBand);
    }
    let y_min = prob.y[i_min];
    let (w_first, w_last) = (prob.omega[0], prob.omega[n - 1]);

    let initial = match opts.initial {
        Some(p) => {
            prob.nodes.check(&p)?;
            p
        }
        None if opts.prescan => {
            let lo_scan = w_first.max(1e-9 * w_last);
            (0..PRESCAN_POINTS)
                .map(|k| lo_scan + (w_last - lo_scan) * k as f64 / (PRESCAN_POINTS - 1) as f64)
                .chain(std::iter::once(prob.omega[i_min]))
                .map(|c| prob.seed_at(c, y_min))
                .map(|p| (prob.objective(&p), p))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, p)| p)
                .expect("non-empty scan")
        }
        None => prob.seed_at(prob.omega[i_min], y_min),
    };
    let initial_objective = prob.objective(&initial);

    let scale = [
        initial.omega_dip_m,
        initial.delta_omega.abs().max(1e-6 * initial.omega_dip_m),
        initial.overall,
    ];
    let unscale = |x: &[f64]| DipParams {
        omega_dip_m: x[0] * scale[0],
        delta_omega: x[1] * scale[1],
        overall: x[2] * scale[2],
    };
    let scaled_objective = |x: &[f64]| prob.objective(&unscale(x));

    let mut x = vec![1.0, 1.0, 1.0];
    let mut step = [0.02, 0.25, 0.02];
    let mut iterations = 0;
    let mut best = scaled_objective(&x);
    let mut converged = false;
    for _ in 0..MAX_RESTARTS {
        let m = nelder_mead(scaled_objective, &x, &step, &opts.simplex);
        iterations += m.iterations;
        let moved =
            m.x.iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                .fold(0.0, f64::max);
        if m.value <= best {
            x = m.x;
            best = m.value;
        }
        converged = m.converged;
        if !m.converged || moved <= 10.0 * opts.simplex.xtol {
            break;
        }
        step = [1e-3, 1e-2, 1e-3];
    }
    if !converged {
        return Err(FitError::NoConvergence { iterations });
    }

    let fitted = unscale(&x);
    let objective = best;

    let h = hessian(scaled_objective, &x, &[1e-4; 3]);
    let s2 = if data.sigma.is_some() {
        1.0
    } else {
        objective / (n - 3) as f64
    };
    let errors = covariance_diagonal(&h, s2)
        .map(|d| [0, 1, 2].map(|i| d[i].sqrt() * scale[i]))
        .unwrap_or([f64::NAN; 3]);

    Ok(DipFitResult {
        omega_dip_m: fitted.omega_dip_m,
        delta_omega: fitted.delta_omega.abs(),
        overall: fitted.overall,
        omega_dip_m_error: errors[0],
        delta_omega_error: errors[1],
        overall_error: errors[2],
        residual_norm: (objective / n as f64).sqrt(),
        objective,
        initial_objective,
        points: n,
        iterations,
        initial,
        band: (w_first, w_last),
        averaging: opts.averaging,
    })
}

/// Diagonal of `2 s2 H^-1`; `None` unless the curvature is positive definite.
fn covariance_diagonal(h: &DMatrix<f64>, s2: f64) -> Option<[f64; 3]> {
    let chol = h.clone().cholesky()?;
    let inv = chol.inverse();
    let d = [inv[(0, 0)], inv[(1, 1)], inv[(2, 2)]].map(|v| 2.0 * s2 * v);
    d.iter().all(|v| v.is_finite() && *v >= 0.0).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn noiseless(p: DipParams, avg: JitterAverage) -> MeasuredSpectrum {
        let f: Vec<f64> = (0..301)
            .map(|i| 700.0 + i as f64 * 1000.0 / 300.0)
            .collect();
        let y = f
            .iter()
            .map(|&f| dip_model_averaged(&p, TAU * f, avg).unwrap())
            .collect();
        MeasuredSpectrum::new(f, y, None).unwrap()
    }

    #[test]
    fn plateau_and_floor() {
        assert_relative_eq!(dip_model(1.0, 0.1, 2.5, 0.0).unwrap(), 2.5);
        assert_eq!(dip_model(1.0, 0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(dip_model(1.0, 0.1, 1.0, 1.0).unwrap() > 0.0);
        assert!(dip_model(1.0, 1.0, 1.0, 0.5).is_err());
        assert!(dip_model(-1.0, 0.1, 1.0, 0.5).is_err());
        assert!(dip_model(1.0, 0.1, 0.0, 0.5).is_err());
    }

    #[test]
    fn two_node_gauss_hermite_is_the_two_point_average() {
        let p = DipParams {
            omega_dip_m: 7.0,
            delta_omega: 0.6,
            overall: 1.3,
        };
        for w in [0.0, 3.0, 6.5, 7.0, 9.0] {
            let a = dip_model_averaged(&p, w, JitterAverage::TwoPoint).unwrap();
            let b = dip_model_averaged(&p, w, JitterAverage::GaussHermite(2)).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
        assert!(dip_model_averaged(&p, 1.0, JitterAverage::GaussHermite(0)).is_err());
    }

    #[test]
    fn noiseless_recovery() {
        let truth = DipParams {
            omega_dip_m: TAU * 1180.0,
            delta_omega: TAU * 70.0,
            overall: 1.0,
        };
        let r = fit_dip(
            &noiseless(truth, JitterAverage::TwoPoint),
            &DipFitOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(r.omega_dip_m, truth.omega_dip_m, max_relative = 1e-8);
        assert_relative_eq!(r.delta_omega, truth.delta_omega, max_relative = 1e-8);
        assert_relative_eq!(r.overall, truth.overall, max_relative = 1e-8);
        assert!(r.objective <= r.initial_objective);
    }

    #[test]
    fn gauss_hermite_mode_recovers_its_own_data() {
        let truth = DipParams {
            omega_dip_m: TAU * 1180.0,
            delta_omega: TAU * 50.0,
            overall: 2.0,
        };
        let opts = DipFitOptions {
            averaging: JitterAverage::GaussHermite(6),
            ..Default::default()
        };
        let r = fit_dip(&noiseless(truth, JitterAverage::GaussHermite(6)), &opts).unwrap();
        assert_relative_eq!(r.omega_dip_m, truth.omega_dip_m, max_relative = 1e-6);
        assert_relative_eq!(r.delta_omega, truth.delta_omega, max_relative = 1e-5);
    }

    #[test]
    fn guards() {
        let flat =
            MeasuredSpectrum::new((1..=20).map(f64::from).collect(), vec![1.0; 20], None).unwrap();
        assert!(matches!(
            fit_dip(&flat, &Default::default()),
            Err(FitError::DegenerateBand)
        ));
        let short = MeasuredSpectrum::new(vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 2.0], None).unwrap();
        assert!(matches!(
            fit_dip(&short, &Default::default()),
            Err(FitError::InsufficientData { needed: 10, got: 3 })
        ));
        let truth = DipParams {
            omega_dip_m: TAU * 1180.0,
            delta_omega: TAU * 70.0,
            overall: 1.0,
        };
        let band = DipFitOptions {
            band: Some((TAU * 1300.0, TAU * 1700.0)),
            ..Default::default()
        };
        assert!(matches!(
            fit_dip(&noiseless(truth, JitterAverage::TwoPoint), &band),
            Err(FitError::DegenerateBand)
        ));
    }
}
