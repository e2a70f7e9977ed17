mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use tofmcl::bench::BenchError;
use tofmcl::characterize::CharacterizeError;
use tofmcl::mcl::MeasurementMode;
use tofmcl::sensor_model::Method;
use tofmcl::simulator::SimulatorError;

#[derive(Debug, Parser)]
#[command(name = "tofmcl", version, about = "ToF sensor characterization and particle-filter localization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate calibration sweeps, fit the sensor model and write it out.
    Characterize(CharacterizeArgs),
    /// Run one localization and print `method e_x_m e_gamma_deg steps`.
    Localize(LocalizeArgs),
    /// Run a (sensors × samples) grid for several methods and emit the result table.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
struct CharacterizeArgs {
    /// Sweep settings (JSON: frames_per_pose, sigma_scale, orientation_sigma_ratio).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Injected sensor model as a calibration file; defaults to the characterized constants.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Output directory for calibration.txt and residuals.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Read noise: on, off, or a multiplier of the tabulated σ.
    #[arg(long, default_value = "on", value_parser = parse_noise)]
    noise: f64,
}

#[derive(Debug, Args)]
struct LocalizeArgs {
    /// Scene JSON file; without it the built-in scene named by --scene is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "crate", value_parser = ["crate", "deer"])]
    scene: String,
    /// Sensor model for PSM as a calibration file.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long, default_value = "psm", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value_t = 1)]
    sensors: usize,
    /// Number of data samples; defaults to every viewpoint of the scene.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "averaged", value_parser = parse_mode)]
    mode: MeasurementMode,
    #[arg(long, default_value = "on", value_parser = parse_noise)]
    noise: f64,
    /// Trace CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Benchmark spec JSON; defaults to the crate grid 1 × {2, 4, 6, 8, 10}.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Overrides the spec's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to one method.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Replace the grid with a single cell.
    #[arg(long)]
    sensors: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<MeasurementMode>,
    #[arg(long, value_parser = parse_noise)]
    noise: Option<f64>,
    /// Result CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|_| format!("unknown method `{s}` (expected psm, ds or is)"))
}

fn parse_mode(s: &str) -> Result<MeasurementMode, String> {
    s.parse().map_err(|e: tofmcl::mcl::MclError| e.to_string())
}

fn parse_noise(s: &str) -> Result<f64, String> {
    match s {
        "on" => Ok(1.0),
        "off" => Ok(0.0),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| format!("noise must be on, off or a non-negative number, got `{s}`")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Characterize(#[from] CharacterizeError),
}

impl CliError {
    /// 2 for anything the user can fix in the inputs, 1 otherwise.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Bench(BenchError::InvalidSpec(_) | BenchError::Infeasible { .. } | BenchError::Json(_)) => 2,
            CliError::Bench(BenchError::Simulator(
                SimulatorError::SensorCount { .. }
                | SimulatorError::InvalidScene(_)
                | SimulatorError::SceneFile { .. }
                | SimulatorError::Json(_)
                | SimulatorError::Geometry(_),
            )) => 2,
            CliError::Characterize(CharacterizeError::InvalidRecord(_)) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("TOFMCL_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Characterize(args) => commands::characterize(args),
        Command::Localize(args) => commands::localize(args),
        Command::Benchmark(args) => commands::benchmark(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
