use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use optodip::budget::{max_relative_difference, BudgetDifference};
use optodip::constants::{hz_to_rad, rad_to_hz};
use optodip::fit::{
    self, synth, DipFitOptions, DipFitResult, DipParams, JitterAverage, RatioFitOptions,
    RatioFitResult,
};
use optodip::optimize::SimplexOptions;
use optodip::{
    characteristic_frequencies, CavityParams, Engine, EngineOptions, FitError, FrequencyGrid,
    GridScale, MeasuredSpectrum, ModelError, NoiseBudget, ParamsConfig, Port,
};

use crate::output::{self, Table};
use crate::{
    BudgetArgs, DetuningArgs, EngineArg, FitDipArgs, FitRatioArgs, Format, FrequenciesArgs,
    ParamSource, PortArg, SweepArgs, SweepVar, SynthDipArgs, SynthRatioArgs,
};

pub fn is_numerical(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<ModelError>()
            .is_some_and(ModelError::is_numerical)
            || e.downcast_ref::<FitError>()
                .is_some_and(FitError::is_numerical)
            || e.downcast_ref::<optodip::Error>()
                .is_some_and(optodip::Error::is_numerical)
    })
}

impl ParamSource {
    fn load_optional(&self) -> Result<Option<CavityParams>> {
        let params = match (&self.config, &self.preset) {
            (Some(path), _) => ParamsConfig::from_path(path)?
                .to_params()
                .with_context(|| format!("in {}", path.display()))?,
            (None, Some(name)) => CavityParams::preset(name).with_context(|| {
                format!(
                    "unknown preset `{name}` (available: {})",
                    CavityParams::PRESETS.join(", ")
                )
            })?,
            (None, None) => return Ok(None),
        };
        let params = match self.eta {
            Some(eta) => params.with_mode_matching(eta).validate()?,
            None => params,
        };
        Ok(Some(params))
    }

    fn load(&self) -> Result<CavityParams> {
        match self.load_optional()? {
            Some(p) => Ok(p),
            None => bail!(
                "give --config PATH or --preset NAME ({})",
                CavityParams::PRESETS.join(", ")
            ),
        }
    }
}

fn port(p: PortArg) -> Port {
    match p {
        PortArg::Ref => Port::Reflection,
        PortArg::Tra => Port::Transmission,
    }
}

#[derive(Serialize)]
struct BudgetJson<'a> {
    port: Port,
    engine: &'a str,
    quantity: &'a str,
    freq_hz: &'a [f64],
    #[serde(flatten)]
    columns: BTreeMap<String, Vec<f64>>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct BudgetSummary {
    port: Port,
    fmin_hz: f64,
    fmax_hz: f64,
    points: usize,
    scale: GridScale,
    /// Closed form relative to the exact engine, on power spectra.
    max_relative_difference: BudgetDifference,
    max: f64,
}

fn summary_path(a: &BudgetArgs) -> Option<PathBuf> {
    a.summary.clone().or_else(|| {
        a.out.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".summary.json");
            PathBuf::from(s)
        })
    })
}

pub fn budget(a: BudgetArgs) -> Result<()> {
    let params = a.source.load()?;
    let scale = if a.grid.log {
        GridScale::Log
    } else {
        GridScale::Linear
    };
    let grid = FrequencyGrid::new(a.grid.fmin, a.grid.fmax, a.grid.points, scale)?;
    let port = port(a.port);
    let opts = EngineOptions::default();
    let (engines, engine_name): (&[(Engine, &str)], &str) = match a.engine {
        EngineArg::Exact => (&[(Engine::Exact, "")], "exact"),
        EngineArg::Closed => (&[(Engine::ClosedForm, "")], "closed"),
        EngineArg::Both => (
            &[(Engine::ClosedForm, ""), (Engine::Exact, "_exact")],
            "both",
        ),
    };
    let budgets = engines
        .iter()
        .map(|&(e, _)| NoiseBudget::compute(&params, &grid, port, e, &opts))
        .collect::<Result<Vec<_>, _>>()?;

    let mut names = vec!["freq_hz".to_string()];
    let mut columns = vec![budgets[0].freq_hz.clone()];
    for (b, &(_, suffix)) in budgets.iter().zip(engines) {
        let shown = if a.psd { b.clone() } else { b.amplitude() };
        for (key, pick) in [
            (
                "s_b1",
                (|s: &optodip::NormalizedSpectrum| s.b1) as fn(&optodip::NormalizedSpectrum) -> f64,
            ),
            ("s_b2", |s| s.b2),
            ("s_d", |s| s.d()),
            ("s_total", |s| s.total),
        ] {
            names.push(format!("{key}{suffix}"));
            columns.push(shown.spectra.iter().map(pick).collect());
        }
    }

    let mut w = output::open(a.out.as_deref())?;
    match a.format {
        Format::Csv => Table {
            header: names,
            columns,
        }
        .write_csv(&mut *w)?,
        Format::Json => {
            let freq = columns.remove(0);
            let warnings = budgets
                .iter()
                .flat_map(|b| b.warnings.iter().map(|x| x.to_string()))
                .collect();
            let doc = BudgetJson {
                port,
                engine: engine_name,
                quantity: if a.psd { "power" } else { "amplitude" },
                freq_hz: &freq,
                columns: names.into_iter().skip(1).zip(columns).collect(),
                warnings,
            };
            output::write_json(&mut *w, &doc)?;
        }
    }
    w.flush()?;

    if let [closed, exact] = budgets.as_slice() {
        let diff = max_relative_difference(closed, exact);
        let summary = BudgetSummary {
            port,
            fmin_hz: grid.start_hz,
            fmax_hz: grid.stop_hz,
            points: grid.points,
            scale,
            max_relative_difference: diff,
            max: diff.max(),
        };
        match summary_path(&a) {
            Some(p) => output::emit_json(Some(&p), &summary)?,
            None => {
                let mut err = std::io::stderr().lock();
                output::write_json(&mut err, &summary)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct FrequencyReport {
    omega_opt_hz: f64,
    omega_dip_hz: f64,
    omega_dip_measured_hz: f64,
    ratio_opt_over_dip_m: f64,
}

fn frequency_report(params: &CavityParams) -> Result<FrequencyReport> {
    let f = characteristic_frequencies(params)?;
    Ok(FrequencyReport {
        omega_opt_hz: rad_to_hz(f.omega_opt),
        omega_dip_hz: rad_to_hz(f.omega_dip),
        omega_dip_measured_hz: rad_to_hz(f.omega_dip_measured),
        ratio_opt_over_dip_m: f.ratio_opt_over_dip_measured(),
    })
}

pub fn frequencies(a: FrequenciesArgs) -> Result<()> {
    let params = a.source.load()?;
    output::emit_json(a.out.as_deref(), &frequency_report(&params)?)
}

fn sweep_values(from: f64, to: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points == 0 {
        bail!("--points must be at least 1");
    }
    if !(from.is_finite() && to.is_finite()) {
        bail!("sweep range must be finite");
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    if log && !(from > 0.0 && to > 0.0) {
        bail!("a logarithmic sweep needs positive endpoints");
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                return to;
            }
            let t = i as f64 / last;
            if log {
                from * (to / from).powf(t)
            } else {
                from + t * (to - from)
            }
        })
        .collect())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let base = a.source.load()?;
    let values = sweep_values(a.from, a.to, a.points, a.log)?;
    let kappa = base.total_decay;
    let name = match a.var {
        SweepVar::Detuning => "detuning_over_kappa",
        SweepVar::KappaIn => "kappa_in_over_kappa",
        SweepVar::Power => "intracavity_power_w",
        SweepVar::Eta => "eta",
    };
    let mut cols = vec![Vec::new(); 5];
    for &v in &values {
        let p = match a.var {
            SweepVar::Detuning => base.with_detuning(v * kappa),
            SweepVar::KappaIn => base.with_input_coupling(v * kappa),
            SweepVar::Power => base.with_intracavity_power(v),
            SweepVar::Eta => base.with_mode_matching(v),
        }
        .validate()
        .with_context(|| format!("{name} = {v}"))?;
        let r = frequency_report(&p).with_context(|| format!("{name} = {v}"))?;
        for (c, x) in cols.iter_mut().zip([
            v,
            r.omega_opt_hz,
            r.omega_dip_hz,
            r.omega_dip_measured_hz,
            r.ratio_opt_over_dip_m,
        ]) {
            c.push(x);
        }
    }
    let header = [
        name,
        "omega_opt_hz",
        "omega_dip_hz",
        "omega_dip_measured_hz",
        "ratio_opt_over_dip_m",
    ]
    .map(String::from)
    .to_vec();
    let mut w = output::open(a.out.as_deref())?;
    Table {
        header,
        columns: cols,
    }
    .write_csv(&mut *w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct InitialHz {
    omega_dip_m_hz: f64,
    delta_omega_hz: f64,
    overall: f64,
}

#[derive(Serialize)]
struct DipReport {
    #[serde(flatten)]
    result: DipFitResult,
    omega_dip_m_hz: f64,
    omega_dip_m_error_hz: f64,
    delta_omega_hz: f64,
    delta_omega_error_hz: f64,
    band_hz: (f64, f64),
    initial_hz: InitialHz,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_omega_dip_measured_hz: Option<f64>,
}

pub fn fit_dip(a: FitDipArgs) -> Result<()> {
    let data = MeasuredSpectrum::from_csv_path(&a.data, &a.column)
        .with_context(|| format!("reading {}", a.data.display()))?;
    let band = match (a.band_min, a.band_max) {
        (None, None) => None,
        (lo, hi) => Some((
            hz_to_rad(lo.unwrap_or(f64::NEG_INFINITY)),
            hz_to_rad(hi.unwrap_or(f64::INFINITY)),
        )),
    };
    let initial = match (a.guess_dip, a.guess_jitter, a.guess_overall) {
        (Some(d), Some(j), Some(o)) => Some(DipParams {
            omega_dip_m: hz_to_rad(d),
            delta_omega: hz_to_rad(j),
            overall: o,
        }),
        _ => None,
    };
    let opts = DipFitOptions {
        band,
        initial,
        averaging: a
            .gauss_hermite
            .map_or(JitterAverage::TwoPoint, JitterAverage::GaussHermite),
        prescan: !a.no_prescan,
        simplex: SimplexOptions {
            max_iter: a.max_iter,
            ..Default::default()
        },
    };
    let predicted = a
        .source
        .load_optional()?
        .map(|p| characteristic_frequencies(&p).map(|f| rad_to_hz(f.omega_dip_measured)))
        .transpose()?;
    let r = fit::fit_dip(&data, &opts)?;
    let report = DipReport {
        omega_dip_m_hz: rad_to_hz(r.omega_dip_m),
        omega_dip_m_error_hz: rad_to_hz(r.omega_dip_m_error),
        delta_omega_hz: rad_to_hz(r.delta_omega),
        delta_omega_error_hz: rad_to_hz(r.delta_omega_error),
        band_hz: (rad_to_hz(r.band.0), rad_to_hz(r.band.1)),
        initial_hz: InitialHz {
            omega_dip_m_hz: rad_to_hz(r.initial.omega_dip_m),
            delta_omega_hz: rad_to_hz(r.initial.delta_omega),
            overall: r.initial.overall,
        },
        predicted_omega_dip_measured_hz: predicted,
        result: r,
    };
    output::emit_json(a.out.as_deref(), &report)
}

#[derive(Serialize)]
struct RatioReport {
    #[serde(flatten)]
    result: RatioFitResult,
    kappa_hz: f64,
    eta: f64,
    search_interval: (f64, f64),
}

pub fn fit_ratio(a: FitRatioArgs) -> Result<()> {
    let params = a.source.load()?;
    let file = File::open(&a.data).with_context(|| format!("cannot open {}", a.data.display()))?;
    let points =
        fit::read_ratio_csv(file).with_context(|| format!("reading {}", a.data.display()))?;
    let opts = RatioFitOptions {
        lower: a.lower,
        upper: a.upper,
        ..Default::default()
    };
    let result = fit::fit_ratio(&points, params.total_decay, params.mode_matching, &opts)?;
    if result.boundary_fit {
        log::warn!("kappa_in/kappa fit is at a search bound or the data do not constrain it");
    }
    output::emit_json(
        a.out.as_deref(),
        &RatioReport {
            result,
            kappa_hz: rad_to_hz(params.total_decay),
            eta: params.mode_matching,
            search_interval: (a.lower, a.upper),
        },
    )
}

#[derive(Serialize)]
struct DetuningReport {
    detuning_hz: f64,
    detuning_over_kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detuning_error_hz: Option<f64>,
}

pub fn detuning(a: DetuningArgs) -> Result<()> {
    let kappa = a.source.load()?.total_decay;
    let d = fit::detuning_from_transmission(a.p_measured, a.p_max, kappa)?;
    let err = a
        .sigma_p
        .map(|s| fit::detuning_error_from_transmission(a.p_measured, s, a.p_max, kappa))
        .transpose()?;
    output::emit_json(
        a.out.as_deref(),
        &DetuningReport {
            detuning_hz: rad_to_hz(d),
            detuning_over_kappa: d / kappa,
            detuning_error_hz: err.map(rad_to_hz),
        },
    )
}

fn write_with(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut w = output::open(path)?;
    f(&mut *w)?;
    w.flush()?;
    Ok(())
}

pub fn synth_dip(a: SynthDipArgs) -> Result<()> {
    let freq = FrequencyGrid::linear(a.fmin, a.fmax, a.points)?.frequencies_hz();
    let truth = DipParams {
        omega_dip_m: hz_to_rad(a.dip_hz),
        delta_omega: hz_to_rad(a.jitter_hz),
        overall: a.overall,
    };
    let data = synth::dip_spectrum(&truth, &freq, a.noise, a.seed)?;
    write_with(a.out.as_deref(), |w| Ok(data.write_csv(w)?))
}

pub fn synth_ratio(a: SynthRatioArgs) -> Result<()> {
    let params = a.source.load()?;
    let det: Vec<f64> = a.detunings.iter().map(|&d| hz_to_rad(d)).collect();
    let pts = synth::ratio_points(
        &det,
        params.total_decay,
        a.kappa_in,
        params.mode_matching,
        a.noise,
        a.seed,
    )?;
    write_with(a.out.as_deref(), |w| Ok(fit::write_ratio_csv(w, &pts)?))
}
