//! Command implementations behind the `lockdown` binary.
//!
//! Every command renders its output to a string so runs can be compared
//! byte for byte; `main` only prints and maps errors to exit codes.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lockdown_core::forecaster::{FitConfig, WeightScheme};
use lockdown_core::pipeline::{self, fit_active, forecast, replay, replay_csv, run_optimize, FitWindow};
use lockdown_core::timeseries::{parse_case_archive, ArchiveFormat};
use lockdown_core::{explain, CaseSeries, ErrorClass, PipelineError, PolyModel, RunOptions, Scenario};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "lockdown", version, about = "Fit active-case trends and find the latest safe lockdown date")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the active-case polynomial on a trailing window.
    Fit(FitArgs),
    /// Predict active cases for the days after the fit window.
    Predict {
        #[command(flatten)]
        fit: FitArgs,
        /// Number of days to predict.
        #[arg(long, default_value_t = 14)]
        days: u32,
        /// Use this fitted model (JSON) instead of fitting.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Find the largest delay before lockdown that keeps every constraint.
    Optimize(OptimizeArgs),
    /// Re-run the optimization for every day in a date range.
    Replay {
        #[command(flatten)]
        run: OptimizeArgs,
        #[arg(long)]
        from: NaiveDate,
        #[arg(long)]
        to: NaiveDate,
    },
    /// Start the HTTP service.
    Serve {
        /// Listening port; overrides the PORT environment variable.
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Case archive (CSV or JSON).
    #[arg(long)]
    pub data: PathBuf,
    /// Fit window length in days.
    #[arg(long, default_value_t = 60)]
    pub window: usize,
    /// Last day of the fit window (defaults to the last date in the data).
    #[arg(long)]
    pub end: Option<NaiveDate>,
    /// Observation weights: `uniform` or `exp:<decay>`.
    #[arg(long, default_value = "uniform")]
    pub weights: WeightScheme,
    /// Polynomial degree.
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            degree: self.degree,
            weight_scheme: self.weights,
            window_days: self.window,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Scenario file with resources and policy settings.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Days from lockdown until its effect shows.
    #[arg(long)]
    pub lag: Option<u32>,
    /// Longest delay considered.
    #[arg(long = "delta-max")]
    pub delta_max: Option<u32>,
    /// Cap on the daily growth rate (fraction).
    #[arg(long = "growth-cap")]
    pub growth_cap: Option<f64>,
    /// Cap on the test positive ratio (fraction).
    #[arg(long = "tpr-cap")]
    pub tpr_cap: Option<f64>,
    /// Use this fitted active-case model (JSON) instead of fitting.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid model file {path}: {reason}")]
    Model { path: PathBuf, reason: String },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("service failed: {0}")]
    Serve(std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Model { .. } => 3,
            CliError::Pipeline(e) => match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Serve(_) => 1,
        }
    }

    /// Error name for the structured message on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "ReadError",
            CliError::Model { .. } => "MalformedModel",
            CliError::Pipeline(e) => e.name(),
            CliError::Serve(_) => "ServiceError",
            CliError::Usage(_) => "UsageError",
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_series(path: &Path) -> Result<CaseSeries, CliError> {
    let raw = read(path)?;
    let series = parse_case_archive(raw.as_slice(), ArchiveFormat::sniff(&raw)).map_err(PipelineError::from)?;
    Ok(series)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let raw = read(path)?;
    let text = String::from_utf8_lossy(&raw);
    Ok(Scenario::from_json(&text).map_err(PipelineError::from)?)
}

pub fn load_model(path: &Path) -> Result<PolyModel, CliError> {
    let raw = read(path)?;
    let model: PolyModel = serde_json::from_slice(&raw).map_err(|e| CliError::Model {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if model.coefficients.is_empty() || model.fit_window.1 < 1 {
        return Err(CliError::Model {
            path: path.to_path_buf(),
            reason: "needs coefficients and a window ending on a positive day".into(),
        });
    }
    Ok(model)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("plain data serializes");
    out.push('\n');
    out
}

/// Settings for optimize and replay, as also accepted by the HTTP service.
pub fn run_options(args: &OptimizeArgs) -> Result<RunOptions, CliError> {
    Ok(RunOptions {
        end: args.fit.end,
        fit: args.fit.config(),
        lag_days: args.lag,
        delta_max: args.delta_max,
        alpha: None,
        growth_cap: args.growth_cap,
        tpr_cap: args.tpr_cap,
        active_model: args.model.as_deref().map(load_model).transpose()?,
    })
}

fn render_fit(fit: &pipeline::ActiveFit<f64>) -> String {
    let m = &fit.model;
    let mut out = format!(
        "window {} .. {} ({} days, day 1 = {})\nweights {}\n",
        fit.window.start, fit.window.end, fit.window.days, fit.window.start, m.weight_scheme
    );
    out.push_str("coefficients (highest power first):\n");
    for (j, c) in m.coefficients.iter().enumerate() {
        out.push_str(&format!("  t^{}: {c:.6}\n", m.degree - j));
    }
    out.push_str(&format!("residual rms: {:.3}\n", m.residual_rms));
    out
}

fn render_forecast(points: &[lockdown_core::ForecastPoint]) -> String {
    let mut out = String::from("date,day_index,predicted_active,low_confidence\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{:.3},{}\n",
            p.date, p.day_index, p.predicted_active, p.low_confidence
        ));
    }
    out
}

/// Runs one command and returns what it prints.
pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Fit(args) => {
            let cs = load_series(&args.data)?;
            let fit = fit_active::<f64>(&cs, args.end, &args.config())?;
            Ok(match args.format {
                OutputFormat::Json => to_json(&fit.model),
                OutputFormat::Text => render_fit(&fit),
            })
        }
        Command::Predict { fit, days, model } => {
            let cs = load_series(&fit.data)?;
            let (model, window) = match model {
                Some(path) => {
                    let model = load_model(path)?;
                    let window = FitWindow::for_series(&cs, fit.end, model.fit_window.1 as usize)?;
                    (model, window)
                }
                None => {
                    let f = fit_active::<f64>(&cs, fit.end, &fit.config())?;
                    (f.model, f.window)
                }
            };
            let points = forecast(&model, &window, *days);
            Ok(match fit.format {
                OutputFormat::Json => to_json(&points),
                OutputFormat::Text => render_forecast(&points),
            })
        }
        Command::Optimize(args) => {
            let cs = load_series(&args.fit.data)?;
            let scenario = load_scenario(&args.scenario)?;
            let report = run_optimize(&cs, &scenario, &run_options(args)?)?;
            Ok(match args.fit.format {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Text => explain(&report.result),
            })
        }
        Command::Replay { run, from, to } => {
            let cs = load_series(&run.fit.data)?;
            let scenario = load_scenario(&run.scenario)?;
            let rows = replay(&cs, &scenario, &run_options(run)?, *from, *to)?;
            Ok(match run.fit.format {
                OutputFormat::Json => to_json(&rows),
                OutputFormat::Text => replay_csv(&rows),
            })
        }
        Command::Serve { port } => {
            let mut config = lockdown_service::ServiceConfig::from_env().map_err(CliError::Usage)?;
            if let Some(port) = port {
                config.port = *port;
            }
            let runtime = tokio::runtime::Runtime::new().map_err(CliError::Serve)?;
            runtime.block_on(lockdown_service::serve(config)).map_err(CliError::Serve)?;
            Ok(String::new())
        }
    }
}
