use std::f64::consts::TAU;

use optodip::analytic::{self, omega_dip, omega_dip_measured, omega_opt};
use optodip::constants::{hz_to_rad, SPEED_OF_LIGHT};
use optodip::fit::{self, synth, DipFitOptions, DipParams, RatioFitOptions, RatioPoint};
use optodip::params::intracavity_power;
use optodip::twophoton::{
    cavity_gain, closed_loop, closed_loop_from_loop_gain, force_noise_spectrum_exact,
    transfer_coefficients,
};
use optodip::{CavityParams, EngineOptions, NormalizedSpectrum, Port, TwoPhotonMatrix};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = CavityParams> {
    (
        4.5f64..6.5,
        0.05f64..0.95,
        0.1f64..3.0,
        -1.0f64..1.5,
        0.02f64..2.0,
        -7.0f64..-3.0,
        0.0f64..=1.0,
    )
        .prop_map(|(lk, ratio, det, lp, len, lm, eta)| {
            let kappa = TAU * 10f64.powf(lk);
            CavityParams {
                wavelength: 1064e-9,
                cavity_length: len,
                mirror_mass: 10f64.powf(lm),
                total_decay: kappa,
                input_coupling: ratio * kappa,
                detuning: det * kappa,
                intracavity_power: 10f64.powf(lp),
                mode_matching: eta,
                rin_amplitude: 1.0,
                rin_phase: 1.0,
                input_power: None,
            }
        })
        .prop_filter("valid", |p| p.validate().is_ok())
}

fn wrap(x: f64) -> f64 {
    x.sin().atan2(x.cos())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn exact(p: &CavityParams, w: f64, port: Port) -> NormalizedSpectrum {
    force_noise_spectrum_exact(p, w, port, &EngineOptions::default())
        .unwrap()
        .normalized
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reflected_carrier_phase_is_sum_of_stage_phases(p in params()) {
        let d = p.derive();
        let (k, ki, de) = (p.total_decay, p.input_coupling, p.detuning);
        // e^{i gamma} ∝ (2 kappa_in - kappa - i Delta)(kappa - i Delta)
        let re = (2.0 * ki - k) * k - de * de;
        let im = -de * (2.0 * ki - k) - de * k;
        let want = im.atan2(re);
        prop_assert!((wrap(d.gamma - want)).abs() < 1e-12);
        prop_assert!((wrap(d.gamma - d.alpha - d.beta)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derive_is_deterministic_and_transmissions_add_up(p in params()) {
        let a = p.derive();
        prop_assert_eq!(a, p.derive());
        let sum = a.t_in * a.t_in + a.t_out * a.t_out;
        prop_assert!(rel(sum, 4.0 * p.total_decay * p.cavity_length / SPEED_OF_LIGHT) < 1e-12);
    }

    #[test]
    fn intracavity_power_peaks_on_resonance(p in params(), pin in 1e-4f64..1.0) {
        let on = intracavity_power(pin, &p.with_detuning(0.0));
        prop_assert!(intracavity_power(pin, &p) <= on);
    }

    #[test]
    fn closed_loop_routes_agree(p in params(), lf in 0.0f64..6.0) {
        let w = TAU * 10f64.powf(lf);
        let o = EngineOptions::default();
        if let (Ok(a), Ok(b)) = (closed_loop(&p, w, &o), closed_loop_from_loop_gain(&p, w, &o)) {
            prop_assert!((a - b).max_abs() / b.max_abs() < 1e-10);
        }
    }

    #[test]
    fn characteristic_frequencies_are_ordered_and_monotone_in_eta(p in params(), e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let wo = omega_opt(&p).unwrap();
        let wd = omega_dip(&p).unwrap();
        let a = omega_dip_measured(&p.with_mode_matching(lo)).unwrap();
        let b = omega_dip_measured(&p.with_mode_matching(hi)).unwrap();
        let slack = 1.0 + 1e-12;
        prop_assert!(wo <= a * slack && a <= b * slack && b <= wd * slack);
    }

    #[test]
    fn gain_detuning_reflection(p in params(), lf in 0.0f64..6.0) {
        let w = TAU * 10f64.powf(lf);
        let flip = TwoPhotonMatrix::from_real(1.0, 0.0, 0.0, -1.0);
        let g = cavity_gain(&p, w);
        let mirrored = flip * cavity_gain(&p.with_detuning(-p.detuning), w) * flip;
        prop_assert!((mirrored - g).max_abs() <= 1e-14 * g.max_abs());
    }

    #[test]
    fn noise_spectra_are_even_in_frequency(p in params(), lf in 0.0f64..5.0) {
        let w = TAU * 10f64.powf(lf);
        let o = EngineOptions::default();
        for port in [Port::Reflection, Port::Transmission] {
            let (Ok(a), Ok(b)) = (transfer_coefficients(&p, w, port, &o), transfer_coefficients(&p, -w, port, &o)) else {
                continue;
            };
            for (x, y) in a.noise().iter().zip(b.noise()) {
                prop_assert!(rel(y.norm(), x.norm()) < 1e-9);
            }
        }
    }

    #[test]
    fn vacuum_phase_and_input_phase_terms_match_between_ports(p in params(), lx in -3.0f64..-0.5) {
        // below omega/kappa ~ 1e-3 the reflected b2 term is limited by rounding
        let w = p.total_decay * 10f64.powf(lx);
        let (Ok(r), Ok(t)) = (
            force_noise_spectrum_exact(&p, w, Port::Reflection, &EngineOptions::default()),
            force_noise_spectrum_exact(&p, w, Port::Transmission, &EngineOptions::default()),
        ) else {
            return Ok(());
        };
        prop_assert!(rel(r.b2, t.b2) < 1e-9);
        prop_assert!(rel(r.d2, t.d2) < 1e-9);
    }

    #[test]
    fn closed_forms_approach_exact_at_low_frequency(p in params(), x in 1e-3f64..1e-2) {
        let w = x * p.total_decay;
        let spring = omega_opt(&p).unwrap() / p.total_decay;
        let ratio = p.input_coupling / p.total_decay;
        prop_assume!(p.detuning >= 0.3 * p.total_decay && (0.1..=0.9).contains(&ratio));
        prop_assume!(spring < 1e-2 && (w / omega_opt(&p).unwrap() - 1.0).abs() > 0.05);
        let bound = 50.0 * (x * x + spring * spring) + 1e-9;
        for port in [Port::Reflection, Port::Transmission] {
            let c = analytic::closed_form_spectrum(&p, w, port).unwrap();
            let e = exact(&p, w, port);
            prop_assert!(rel(c.b2, e.b2) < 1e-6);
            prop_assert!(rel(c.total, e.total) < bound, "{port}: {} vs {} bound {bound}", c.total, e.total);
        }
    }

    #[test]
    fn dip_model_symmetric_in_jitter_sign(c in 10.0f64..1e4, frac in 0.0f64..0.9, a in 0.1f64..10.0, w in 0.0f64..2e4) {
        let d = frac * c;
        prop_assert_eq!(fit::dip_model(c, d, a, w).unwrap(), fit::dip_model(c, -d, a, w).unwrap());
    }

    #[test]
    fn dip_model_is_continuous(c in 10.0f64..1e4, frac in 0.0f64..0.9, a in 0.1f64..10.0, w in 0.0f64..2e4) {
        let d = frac * c;
        let base = fit::dip_model(c, d, a, w).unwrap();
        let h = 1e-9;
        let nudged = [
            fit::dip_model(c * (1.0 + h), d, a, w).unwrap(),
            fit::dip_model(c, d + h * c, a, w).unwrap(),
            fit::dip_model(c, d, a * (1.0 + h), w).unwrap(),
            fit::dip_model(c, d, a, w + h * c).unwrap(),
        ];
        for v in nudged {
            prop_assert!((v - base).abs() <= 1e-6 * (base + a));
        }
    }

    #[test]
    fn ratio_model_rises_with_detuning(x in 0.01f64..0.99, eta in 0.01f64..=1.0) {
        let k = 1.0;
        let vals: Vec<f64> = (0..=290).map(|i| fit::ratio_model(0.1 + 0.01 * i as f64, k, x, eta).unwrap()).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ratio_fit_ignores_common_error_scale(seed in 0u64..1000, scale in 0.01f64..100.0) {
        let k = 2.0;
        let det = [0.3, 0.5, 0.8, 1.2];
        let pts = synth::ratio_points(&det, k, 0.81, 0.92, 0.02, seed).unwrap();
        let scaled: Vec<RatioPoint> = pts.iter().map(|p| RatioPoint { sigma: p.sigma * scale, ..*p }).collect();
        let o = RatioFitOptions::default();
        let a = fit::fit_ratio(&pts, k, 0.92, &o).unwrap();
        let b = fit::fit_ratio(&scaled, k, 0.92, &o).unwrap();
        prop_assert!((a.kappa_in_over_kappa - b.kappa_in_over_kappa).abs() < 1e-8);
        if a.kappa_in_over_kappa_error.is_finite() {
            prop_assert!(rel(b.kappa_in_over_kappa_error, a.kappa_in_over_kappa_error * scale) < 1e-3);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dip_fit_recovers_noiseless_truth(c in 900.0f64..1500.0, d in 30.0f64..100.0, a in 0.1f64..10.0) {
        let truth = DipParams { omega_dip_m: TAU * c, delta_omega: TAU * d, overall: a };
        let freq: Vec<f64> = (0..301).map(|i| 700.0 + i as f64 * 1000.0 / 300.0).collect();
        let data = synth::dip_spectrum(&truth, &freq, 0.0, 0).unwrap();
        let r = fit::fit_dip(&data, &DipFitOptions::default()).unwrap();
        prop_assert!(rel(r.omega_dip_m, truth.omega_dip_m) < 1e-6);
        prop_assert!(rel(r.delta_omega, truth.delta_omega) < 1e-5);
        prop_assert!(rel(r.overall, truth.overall) < 1e-6);
    }

    #[test]
    fn dip_fit_never_worsens_the_initial_guess(seed in 0u64..10_000, c in 1000.0f64..1400.0) {
        let truth = DipParams { omega_dip_m: TAU * c, delta_omega: TAU * 70.0, overall: 1.0 };
        let freq: Vec<f64> = (0..301).map(|i| 700.0 + i as f64 * 1000.0 / 300.0).collect();
        let data = synth::dip_spectrum(&truth, &freq, 0.01, seed).unwrap();
        let guess = DipParams { omega_dip_m: TAU * 1200.0, delta_omega: TAU * 50.0, overall: 0.9 };
        let opts = DipFitOptions { initial: Some(guess), ..Default::default() };
        let r = fit::fit_dip(&data, &opts).unwrap();
        prop_assert!(r.objective <= r.initial_objective);
        prop_assert_eq!(&r, &fit::fit_dip(&data, &opts).unwrap());
    }
}

#[test]
fn closed_form_error_scales_quadratically() {
    let p = CavityParams::nominal();
    for port in [Port::Reflection, Port::Transmission] {
        let err = |f: f64| {
            let w = hz_to_rad(f);
            rel(
                analytic::closed_form_spectrum(&p, w, port).unwrap().total,
                exact(&p, w, port).total,
            )
        };
        let ratio = err(5e3) / err(2.5e3);
        assert!((3.5..4.5).contains(&ratio), "{port}: {ratio}");
    }
}

#[test]
fn reflection_and_transmission_d1_agree_to_leading_order() {
    let p = CavityParams::nominal();
    for f in [10.0, 100.0, 1e3, 5e3] {
        let w = hz_to_rad(f);
        let x = w / p.total_decay;
        let (r, t) = (
            exact(&p, w, Port::Reflection),
            exact(&p, w, Port::Transmission),
        );
        assert!(
            rel(r.d1, t.d1) <= 20.0 * x * x + 1e-9,
            "f={f}: {} vs {}",
            r.d1,
            t.d1
        );
    }
}

#[test]
fn fit_round_trips_over_many_seeds() {
    let truth = DipParams {
        omega_dip_m: TAU * 1180.0,
        delta_omega: TAU * 70.0,
        overall: 1.0,
    };
    let freq: Vec<f64> = (0..301)
        .map(|i| 700.0 + i as f64 * 1000.0 / 300.0)
        .collect();
    let failures = (1000..1050u64)
        .filter(|&seed| {
            let data = synth::dip_spectrum(&truth, &freq, 0.01, seed).unwrap();
            !fit::fit_dip(&data, &DipFitOptions::default()).is_ok_and(|r| {
                rel(r.omega_dip_m, truth.omega_dip_m) <= 0.01
                    && rel(r.delta_omega, truth.delta_omega) <= 0.15
            })
        })
        .count();
    assert!(failures <= 1, "{failures}/50");
}
