use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// Noise budgets, characteristic frequencies and fits for detuned
/// optomechanical cavities read out in the amplitude quadrature.
#[derive(Parser, Debug)]
#[command(name = "optodip", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SQL-normalized force-noise budget over a frequency grid.
    Budget(BudgetArgs),
    /// Optical-spring and dip frequencies as JSON.
    Frequencies(FrequenciesArgs),
    /// Characteristic frequencies while one parameter is swept.
    Sweep(SweepArgs),
    /// Fit the jitter-averaged dip model to a measured amplitude spectrum.
    FitDip(FitDipArgs),
    /// Fit kappa_in/kappa to optical-spring / dip frequency ratios.
    FitRatio(FitRatioArgs),
    /// Detuning from transmitted power relative to the resonant maximum.
    Detuning(DetuningArgs),
    /// Write a synthetic dip spectrum (`freq_hz,asd`).
    SynthDip(SynthDipArgs),
    /// Write synthetic ratio points (`detuning_hz,ratio,sigma`).
    SynthRatio(SynthRatioArgs),
}

#[derive(Args, Debug, Clone)]
struct ParamSource {
    /// JSON parameter file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in parameter set: nominal or experiment.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override the mode-matching ratio.
    #[arg(long, value_name = "VALUE")]
    eta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Lowest frequency [Hz].
    #[arg(long, default_value_t = 10.0)]
    fmin: f64,
    /// Highest frequency [Hz].
    #[arg(long, default_value_t = 1e5)]
    fmax: f64,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Logarithmic spacing (linear otherwise).
    #[arg(long)]
    log: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PortArg {
    #[value(alias = "reflection")]
    Ref,
    #[value(alias = "transmission")]
    Tra,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EngineArg {
    Exact,
    #[value(alias = "closed-form")]
    Closed,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[command(flatten)]
    source: ParamSource,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = PortArg::Ref)]
    port: PortArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Closed)]
    engine: EngineArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Emit power spectra instead of amplitude spectra.
    #[arg(long)]
    psd: bool,
    /// Output file (stdout if omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Comparison summary for `--engine both` (defaults to `<out>.summary.json`,
    /// or stderr when writing to stdout).
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FrequenciesArgs {
    #[command(flatten)]
    source: ParamSource,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SweepVar {
    /// Delta/kappa.
    Detuning,
    /// kappa_in/kappa.
    KappaIn,
    /// Intracavity power [W].
    Power,
    /// Mode-matching ratio.
    Eta,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: ParamSource,
    #[arg(long = "var", value_enum)]
    var: SweepVar,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long)]
    log: bool,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitDipArgs {
    /// CSV with `freq_hz,<column>[,sigma]`.
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    /// Value column to fit.
    #[arg(long, default_value = "asd")]
    column: String,
    /// Lower edge of the fit band [Hz].
    #[arg(long, value_name = "HZ")]
    band_min: Option<f64>,
    /// Upper edge of the fit band [Hz].
    #[arg(long, value_name = "HZ")]
    band_max: Option<f64>,
    /// Initial dip frequency [Hz].
    #[arg(long, value_name = "HZ", requires_all = ["guess_jitter", "guess_overall"])]
    guess_dip: Option<f64>,
    /// Initial jitter width [Hz].
    #[arg(long, value_name = "HZ", requires_all = ["guess_dip", "guess_overall"])]
    guess_jitter: Option<f64>,
    /// Initial overall factor.
    #[arg(long, requires_all = ["guess_dip", "guess_jitter"])]
    guess_overall: Option<f64>,
    /// Average the jitter with N Gauss-Hermite nodes instead of two points.
    #[arg(long, value_name = "N")]
    gauss_hermite: Option<usize>,
    /// Skip the coarse scan over the dip frequency.
    #[arg(long)]
    no_prescan: bool,
    /// Iteration limit per simplex run.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Parameters for reporting the predicted dip next to the fit (optional).
    #[command(flatten)]
    source: ParamSource,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitRatioArgs {
    /// CSV with `detuning_hz,ratio,sigma`.
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    #[command(flatten)]
    source: ParamSource,
    #[arg(long, default_value_t = 0.5)]
    lower: f64,
    #[arg(long, default_value_t = 1.0)]
    upper: f64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetuningArgs {
    #[command(flatten)]
    source: ParamSource,
    /// Transmitted power during the measurement.
    #[arg(long)]
    p_measured: f64,
    /// Transmitted power on resonance (same units).
    #[arg(long)]
    p_max: f64,
    /// Uncertainty of `p_measured`.
    #[arg(long)]
    sigma_p: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthDipArgs {
    #[arg(long, default_value_t = 1180.0)]
    dip_hz: f64,
    #[arg(long, default_value_t = 70.0)]
    jitter_hz: f64,
    #[arg(long, default_value_t = 1.0)]
    overall: f64,
    #[arg(long, default_value_t = 700.0)]
    fmin: f64,
    #[arg(long, default_value_t = 1700.0)]
    fmax: f64,
    #[arg(long, default_value_t = 301)]
    points: usize,
    /// Relative multiplicative noise.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthRatioArgs {
    #[command(flatten)]
    source: ParamSource,
    /// True kappa_in/kappa.
    #[arg(long, default_value_t = 0.81)]
    kappa_in: f64,
    /// Detunings [Hz].
    #[arg(long, value_delimiter = ',', default_values_t = [60e3, 100e3, 150e3, 220e3])]
    detunings: Vec<f64>,
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Usage, configuration and data problems.
const EXIT_USAGE: u8 = 2;
/// Optimizer failures and evaluation at a pole.
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Budget(a) => commands::budget(a),
        Command::Frequencies(a) => commands::frequencies(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::FitDip(a) => commands::fit_dip(a),
        Command::FitRatio(a) => commands::fit_ratio(a),
        Command::Detuning(a) => commands::detuning(a),
        Command::SynthDip(a) => commands::synth_dip(a),
        Command::SynthRatio(a) => commands::synth_ratio(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if commands::is_numerical(&err) {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
