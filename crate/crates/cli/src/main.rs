//! Command-line front end: dataset analysis, the Stirling accuracy table,
//! consolidation sweeps, κ fits and generalized-entropy scenario reports.
//!
//! Exit codes: 0 success, 2 input or format problem, 3 validation failure,
//! 4 computation failure.

mod commands;
mod report;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lastmile_entropy::ingest::Rejection;
use lastmile_entropy::Error;
use serde::Serialize;

use report::Format;

#[derive(Parser, Debug)]
#[command(
    name = "lastmile-entropy",
    version,
    about = "Structural entropy of last-mile delivery routes"
)]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Adoption realization for `consolidate`.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Expectation)]
    mode: Mode,
    /// Encoding of error reports on stderr.
    #[arg(long, global = true, value_enum, default_value_t = ErrorFormat::Text)]
    error_format: ErrorFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Expectation,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ErrorFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct DatasetArgs {
    /// Route dataset (JSON or CSV).
    dataset: PathBuf,
    /// Dataset encoding; guessed from the extension when absent.
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
    /// Drop invalid routes (listed as notes) instead of failing.
    #[arg(long)]
    skip_invalid: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-route entropy profiles and dataset summary.
    Analyze {
        #[command(flatten)]
        data: DatasetArgs,
        /// G_norm threshold between low and high.
        #[arg(long, default_value_t = 0.5)]
        g_threshold: f64,
        /// H_norm threshold between low and high.
        #[arg(long, default_value_t = 0.5)]
        h_threshold: f64,
    },
    /// Exact structural entropy against Stirling approximations.
    Stirling {
        /// Parcel counts N.
        #[arg(long = "n", value_delimiter = ',', default_values_t = [100u64, 200, 300])]
        ns: Vec<u64>,
        /// Average parcels per stop.
        #[arg(long = "p-bar", value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0, 5.0, 10.0])]
        p_bars: Vec<f64>,
    },
    /// Pickup-point consolidation sweep.
    Consolidate {
        #[command(flatten)]
        data: DatasetArgs,
        /// Pickup points CSV (point_id,lat,lon).
        #[arg(long)]
        points: PathBuf,
        /// Activation thresholds t in km.
        #[arg(long = "t", value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0])]
        thresholds: Vec<f64>,
        /// Sigmoid steepness values.
        #[arg(long = "beta", value_delimiter = ',', default_values_t = [1.0, 5.0, 10.0])]
        betas: Vec<f64>,
        /// Acceptance ratios.
        #[arg(long = "lambda", value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75, 1.0])]
        lambdas: Vec<f64>,
        /// Count one pickup customer per moved parcel instead of per stop.
        #[arg(long)]
        per_parcel_customers: bool,
    },
    /// Fit d = κ·G_norm/(1 − G_norm), overall and per city.
    FitKappa {
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Generalized-entropy scenarios: evaluators, gaps and scaling.
    Scenarios {
        /// Scenario document (.json or .toml).
        file: PathBuf,
    },
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rejections: Vec<Rejection>,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self::with(2, "input", message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::with(3, "validation", message)
    }

    pub fn computation(message: impl Into<String>) -> Self {
        Self::with(4, "computation", message)
    }

    fn with(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            rejections: Vec::new(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Format { .. } | Error::Io(_) | Error::Config(_) => Failure::input(e.to_string()),
            Error::Validation(_) | Error::Precondition(_) => Failure::validation(e.to_string()),
            Error::Domain(_) | Error::Fit(_) | Error::Classification(_) => {
                Failure::computation(e.to_string())
            }
        }
    }
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::input(format!("cannot write output: {e}"));
    match output {
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(io),
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let report = match &cli.command {
        Command::Analyze {
            data,
            g_threshold,
            h_threshold,
        } => commands::analyze(data, *g_threshold, *h_threshold)?,
        Command::Stirling { ns, p_bars } => commands::stirling(ns, p_bars)?,
        Command::Consolidate {
            data,
            points,
            thresholds,
            betas,
            lambdas,
            per_parcel_customers,
        } => {
            let mode = match cli.mode {
                Mode::Expectation => "expectation",
                Mode::Mc => "mc",
            };
            let mode = lastmile_entropy::consolidation::SimulationMode::from_flags(mode, cli.seed)?;
            let grid = lastmile_entropy::consolidation::SweepGrid {
                thresholds: thresholds.clone(),
                betas: betas.clone(),
                lambdas: lambdas.clone(),
            };
            commands::consolidate(data, points, grid, mode, *per_parcel_customers)?
        }
        Command::FitKappa { data } => commands::fit_kappa(data)?,
        Command::Scenarios { file } => commands::scenarios(file)?,
    };
    emit(&report.render(cli.format), cli.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match cli.error_format {
                ErrorFormat::Text => {
                    eprintln!("error: {}", f.message);
                    for r in &f.rejections {
                        eprintln!(
                            "  rejected route {}: {}",
                            r.route_id.as_deref().unwrap_or("?"),
                            r.reason
                        );
                    }
                }
                ErrorFormat::Json => {
                    eprintln!("{}", serde_json::to_string(&f).expect("plain json"));
                }
            }
            ExitCode::from(f.code)
        }
    }
}
