//! `cropcat` — command-line front end for the crop-and-concatenate
//! augmentation pipeline: generate or import datasets, preprocess them,
//! augment them, train the reference classifier with cross-validation, and
//! evaluate saved ensembles.
//!
//! Every command validates its arguments before touching the filesystem,
//! writes outputs atomically, and drops a JSON manifest next to each output
//! describing the fully resolved run. Exit codes are machine-checkable:
//! 1 usage, 2 I/O, 3 data invariant or format violation, 4 numeric failure.
//! The env var `CROPCAT_LOG` (error, info, debug) controls log verbosity.

mod commands;
mod import;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Single-line, coded errors; the code doubles as the process exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<cropcat_core::Error> for CliError {
    fn from(err: cropcat_core::Error) -> Self {
        use cropcat_core::Error;
        match err {
            Error::Io { .. } => CliError::Io(err.to_string()),
            Error::InvalidArgument(_) | Error::Format(_) => CliError::Data(err.to_string()),
            Error::Numeric(_) => CliError::Numeric(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cropcat",
    version,
    about = "Crop-and-concatenate augmentation pipeline for multichannel time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset
    Generate(GenerateArgs),
    /// Low-pass filter and standardize every trial of a dataset
    Preprocess(PreprocessArgs),
    /// Write an augmented copy of a dataset
    Augment(AugmentArgs),
    /// Train a cross-validated model ensemble
    Train(TrainArgs),
    /// Evaluate a saved ensemble on a dataset
    Evaluate(EvaluateArgs),
    /// Build a dataset from a directory of per-trial CSV files
    Import(ImportArgs),
}

#[derive(Args, Serialize)]
pub struct GenerateArgs {
    /// Number of classes
    #[arg(long, default_value_t = 2)]
    pub classes: u32,
    /// Trials per class
    #[arg(long = "per-class", default_value_t = 50)]
    pub per_class: usize,
    /// Channels per trial
    #[arg(long, default_value_t = 3)]
    pub channels: usize,
    /// Timepoints per trial
    #[arg(long, default_value_t = 500)]
    pub timepoints: usize,
    /// Class separation of the tone amplitudes
    #[arg(long, default_value_t = 2.0)]
    pub sep: f64,
    /// Standard deviation of the additive noise
    #[arg(long = "noise-sd", default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output dataset file
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct PreprocessArgs {
    /// Input dataset file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output dataset file
    #[arg(long)]
    pub out: PathBuf,
    /// Low-pass cutoff in Hz
    #[arg(long, default_value_t = 38.0)]
    pub cutoff: f64,
    /// Filter order (even)
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Decay rate of the moving standardization
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Variance floor of the moving standardization
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
}

#[derive(Args, Serialize)]
pub struct AugmentArgs {
    /// Input dataset file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output dataset file
    #[arg(long)]
    pub out: PathBuf,
    /// Augmentation method: none, cropcat_spatial, cropcat_temporal,
    /// time_mask, gaussian_noise, cutout
    #[arg(long)]
    pub method: String,
    /// Window-ratio cap for the crop-and-concatenate methods
    #[arg(long, default_value_t = 0.125)]
    pub lambda: f64,
    /// Column fraction zeroed by time_mask
    #[arg(long = "mask-ratio", default_value_t = 0.1)]
    pub mask_ratio: f64,
    /// Noise scale of gaussian_noise
    #[arg(long = "noise-scale", default_value_t = 0.05)]
    pub noise_scale: f64,
    /// Channel fraction of one cutout region
    #[arg(long = "cutout-channel-frac", default_value_t = 0.25)]
    pub cutout_channel_frac: f64,
    /// Timepoint fraction of one cutout region
    #[arg(long = "cutout-time-frac", default_value_t = 0.5)]
    pub cutout_time_frac: f64,
    /// Number of cutout regions
    #[arg(long = "cutout-regions", default_value_t = 3)]
    pub cutout_regions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write one JSON line per output trial (soft label + mix window)
    #[arg(long = "emit-provenance")]
    pub emit_provenance: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    /// Training dataset file
    #[arg(long)]
    pub data: PathBuf,
    /// Optional holdout dataset; adds metrics.json to the output directory
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Augmentation method applied during training
    #[arg(long, default_value = "none")]
    pub method: String,
    #[arg(long, default_value_t = 0.125)]
    pub lambda: f64,
    #[arg(long = "mask-ratio", default_value_t = 0.1)]
    pub mask_ratio: f64,
    #[arg(long = "noise-scale", default_value_t = 0.05)]
    pub noise_scale: f64,
    #[arg(long = "cutout-channel-frac", default_value_t = 0.25)]
    pub cutout_channel_frac: f64,
    #[arg(long = "cutout-time-frac", default_value_t = 0.5)]
    pub cutout_time_frac: f64,
    #[arg(long = "cutout-regions", default_value_t = 3)]
    pub cutout_regions: usize,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long = "batch", default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long = "lr", default_value_t = 2e-3)]
    pub lr0: f64,
    #[arg(long = "eta-min", default_value_t = 0.0)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for fold_<i>.ccml models (and metrics.json)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EvaluateArgs {
    /// Directory holding the .ccml fold models
    #[arg(long)]
    pub models: PathBuf,
    /// Dataset to evaluate on
    #[arg(long)]
    pub data: PathBuf,
    /// Output JSON report path
    #[arg(long)]
    pub report: PathBuf,
    /// Method used to build mixed inputs for the confidence metrics
    #[arg(long, default_value = "cropcat_temporal")]
    pub method: String,
    #[arg(long, default_value_t = 0.125)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize)]
pub struct ImportArgs {
    /// Directory of CSV files named like `..label<k>..subject<s>..csv`,
    /// one trial per file, one channel per row
    #[arg(long)]
    pub dir: PathBuf,
    /// Number of classes the labels index into
    #[arg(long)]
    pub classes: u32,
    /// Sample rate in Hz
    #[arg(long)]
    pub rate: f64,
    /// Output dataset file
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CROPCAT_LOG", "error"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version are successful exits, everything else is usage
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error[1]: {}", first_line(&err.to_string()));
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Preprocess(args) => commands::preprocess(&args),
        Command::Augment(args) => commands::augment(&args),
        Command::Train(args) => commands::train(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Import(args) => commands::import(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {}", err.code(), first_line(err.message()));
            ExitCode::from(err.code())
        }
    }
}

fn first_line(message: &str) -> &str {
    message.lines().next().unwrap_or(message).trim_end()
}
