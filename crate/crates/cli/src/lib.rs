//! Command-line front end: synthetic data generation, the month-by-month
//! stability experiment and 2-D projections of a fitted joint law.

pub mod plot;
pub mod schema;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qstab::ingest::{epoch_slice, fit_epoch_model, load_csv, synth_generate};
use qstab::presets::{self, SigmaPreset};
use qstab::stability::{hellinger_max, run_experiment};
use qstab::{ChannelConfig, CopulaModel, ExperimentConfig, FamilyAssignment, MetricId, Secret, StabilityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

/// Worker-count override; `0` or unset lets rayon decide.
pub const THREADS_ENV: &str = "QSTAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] qstab::Error),
    #[error("report failed its schema check:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(qstab::Error::Io(_)) => EXIT_IO,
            CliError::Core(qstab::Error::Csv(e)) if e.is_io_error() => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

#[derive(Debug, Parser)]
#[command(name = "qstab", version, about = "Device-reliability and program-stability experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic characterization CSV drawn from the built-in model.
    Synth(SynthArgs),
    /// Run the month-by-month perturbation experiment and write a JSON report.
    Experiment(ExperimentArgs),
    /// Sample a 2-D projection of a fitted joint law.
    Projection(ProjectionArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SigmaChoice {
    Identity,
    WashingtonLike,
}

impl From<SigmaChoice> for SigmaPreset {
    fn from(c: SigmaChoice) -> Self {
        match c {
            SigmaChoice::Identity => SigmaPreset::Identity,
            SigmaChoice::WashingtonLike => SigmaPreset::WashingtonLike,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 31)]
    pub days: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SigmaChoice::WashingtonLike)]
    pub sigma_preset: SigmaChoice,
    /// First date of the series.
    #[arg(long, default_value = "2022-01-01")]
    pub start: NaiveDate,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Characterization CSV; the built-in January-2022-like model is used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "2022-01")]
    pub baseline_month: String,
    #[arg(long, default_value_t = 15)]
    pub months: usize,
    #[arg(long, default_value_t = 0.20)]
    pub s_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value = "0011")]
    pub secret: Secret,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub hellinger_samples: usize,
    #[arg(long, default_value_t = 100)]
    pub circuit_samples: usize,
    /// Shots per noise sample; 0 uses exact outcome probabilities.
    #[arg(long, default_value_t = 8192)]
    pub shots: u64,
    /// Relative half-width of each parameter perturbation.
    #[arg(long, default_value_t = 0.05)]
    pub perturb_step: f64,
    #[arg(long, default_value = "x5")]
    pub perturb_metric: MetricId,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    /// Directory for the per-epoch plot-data files.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectionArgs {
    /// Characterization CSV; the built-in January-2022-like model is used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "2022-01")]
    pub month: String,
    /// Two comma-separated metric ids.
    #[arg(long, default_value = "x0,x12")]
    pub metrics: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr, summaries to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(&a).map(|()| EXIT_OK),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::Projection(a) => cmd_projection(&a).map(|()| EXIT_OK),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let truth: CopulaModel = presets::january_2022_like(args.sigma_preset.into());
    synth_generate(&truth, args.days, args.seed, args.start, &args.out).map_err(|e| match e {
        qstab::Error::Io(source) => CliError::Io { context: format!("writing {}", args.out.display()), source },
        other => other.into(),
    })?;
    println!("wrote {} ({} days x 16 metrics)", args.out.display(), args.days);
    Ok(())
}

fn baseline_model(data: Option<&Path>, month: &str) -> Result<CopulaModel, CliError> {
    match data {
        Some(path) => {
            let series = load_csv(path).map_err(|e| match e {
                qstab::Error::Io(source) => CliError::Io { context: format!("reading {}", path.display()), source },
                other => other.into(),
            })?;
            let epoch = epoch_slice(&series, month)?;
            Ok(fit_epoch_model(&epoch, &FamilyAssignment::default())?)
        }
        None => Ok(presets::january_2022_like::<f64>(SigmaPreset::WashingtonLike).with_label(month)),
    }
}

/// Serializes the report, checks it against the shipped schema and writes it.
pub fn write_report(path: &Path, report: &StabilityReport) -> Result<(), CliError> {
    let value = serde_json::to_value(report).map_err(|e| CliError::Usage(format!("serializing report: {e}")))?;
    let errors = schema::validate(schema::report_schema(), &value);
    if !errors.is_empty() {
        return Err(CliError::Schema(errors));
    }
    let mut text =
        serde_json::to_string_pretty(report).map_err(|e| CliError::Usage(format!("serializing report: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(io_error(format!("writing {}", path.display())))
}

/// Indices of epochs where `s` exceeds `s_tol` or the bound evaluated at the
/// upper confidence edges.
pub fn bound_violations(report: &StabilityReport) -> Vec<usize> {
    let base_se = report.baseline.mean_obs_stderr;
    report
        .epochs
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.satisfied || e.bound_slack(base_se, report.config.c) < 0.0)
        .map(|(k, _)| k)
        .collect()
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<i32, CliError> {
    hellinger_max(args.s_tol, args.c)?;
    let config = ExperimentConfig {
        s_tol: args.s_tol,
        c: args.c,
        hellinger_samples: args.hellinger_samples,
        circuit_samples: args.circuit_samples,
        shots: args.shots,
        months: args.months,
        perturb_step: args.perturb_step,
        perturb_metric: args.perturb_metric,
        seed: args.seed,
        channels: ChannelConfig::default(),
        secret: args.secret.clone(),
    };
    config.validate()?;
    let baseline = baseline_model(args.data.as_deref(), &args.baseline_month)?;
    let report = run_experiment(&config, &baseline)?;
    write_report(&args.out, &report)?;
    if let Some(dir) = &args.plot_data {
        plot::write_plot_data(dir, &report).map_err(io_error(format!("writing plot data to {}", dir.display())))?;
    }
    let s = &report.summary;
    println!(
        "wrote {}: {} epochs, max H {:.4} (H_max {:.4}), max s {:.4}, mean s {:.4}",
        args.out.display(),
        s.epochs,
        s.max_hellinger,
        s.hellinger_max,
        s.max_stability,
        s.mean_stability
    );
    let violations = bound_violations(&report);
    if violations.is_empty() {
        Ok(EXIT_OK)
    } else {
        let labels: Vec<&str> = violations.iter().map(|&k| report.epochs[k].label.as_str()).collect();
        eprintln!("bound check failed for epochs {}", labels.join(", "));
        Ok(EXIT_BOUND)
    }
}

fn parse_metric_pair(text: &str) -> Result<[MetricId; 2], CliError> {
    let ids = text
        .split(',')
        .map(|s| s.trim().parse::<MetricId>().map_err(|_| CliError::Usage(format!("unknown metric id {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    <[MetricId; 2]>::try_from(ids).map_err(|_| CliError::Usage(format!("expected two metric ids, got {text:?}")))
}

pub fn cmd_projection(args: &ProjectionArgs) -> Result<(), CliError> {
    let [a, b] = parse_metric_pair(&args.metrics)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let model = baseline_model(args.data.as_deref(), &args.month)?;
    let mut out = format!("{a},{b}\n");
    for x in model.sample(args.samples, args.seed) {
        out.push_str(&format!("{},{}\n", x[a.index()], x[b.index()]));
    }
    fs::write(&args.out, out).map_err(io_error(format!("writing {}", args.out.display())))?;
    println!("wrote {} ({} samples of {a}, {b})", args.out.display(), args.samples);
    Ok(())
}
