//! Batch front end: SNR sweeps, figure datasets and per-configuration
//! metrics.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::model::{AntennaConfig, ImpairmentConfig};

pub mod figure;
pub mod grid;
pub mod metrics;
pub mod sweep;

pub use figure::{reproduce_figure, FigureId, FigureOverrides};
pub use metrics::{print_metrics, Bound, MetricsReport};
pub use sweep::{run_sweep, write_sweep, SweepOutput, SweepRequest, SweepRow};

/// Output path value meaning standard output.
pub const STDOUT_SENTINEL: &str = "-";

pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Unsupported(Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Numerical(Error),
}

impl CliError {
    /// Process exit code. Usage errors from argument parsing exit with 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidRequest(_) => 3,
            CliError::Unsupported(_) => 4,
            CliError::Output { .. } => 5,
            CliError::Numerical(_) => 6,
        }
    }

    pub(crate) fn output(path: &Path, source: io::Error) -> Self {
        CliError::Output {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedConfiguration { .. } => CliError::Unsupported(e),
            Error::Domain { .. } | Error::InvalidConfig(_) => CliError::InvalidRequest(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    All,
}

impl Method {
    pub fn expand(self) -> Vec<Method> {
        match self {
            Method::All => vec![Method::ClosedForm, Method::Quadrature, Method::MonteCarlo],
            m => vec![m],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
            Method::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "mimo-capacity", version, about = "Ergodic MIMO capacity with residual transceiver impairments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity over an SNR grid with the chosen evaluator(s).
    Sweep(SweepArgs),
    /// Write the datasets behind one of the standard figures.
    Figure(FigureArgs),
    /// Low-SNR metrics, ceilings and large-array limits of a configuration.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Transmit antennas.
    #[arg(long, default_value_t = 4)]
    pub nt: usize,
    /// Receive antennas.
    #[arg(long, default_value_t = 4)]
    pub nr: usize,
    /// Transmitter distortion level (EVM).
    #[arg(long = "delta-t", default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta_t: f64,
    /// Receiver distortion level.
    #[arg(long = "delta-r", default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta_r: f64,
}

impl SystemArgs {
    pub fn configs(&self) -> Result<(AntennaConfig, ImpairmentConfig), CliError> {
        Ok((
            AntennaConfig::new(self.nt, self.nr)?,
            ImpairmentConfig::new(self.delta_t, self.delta_r)?,
        ))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// SNR grid in dB as start:step:stop (inclusive) or a single value.
    #[arg(long = "snr-db", default_value = "-10:5:30", allow_hyphen_values = true)]
    pub snr_db: String,
    #[arg(long, value_enum, default_value_t = Method::All)]
    pub method: Method,
    /// Monte-Carlo trials per SNR point.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for Monte-Carlo shards (output does not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = STDOUT_SENTINEL)]
    pub out: String,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    /// Output directory for the dataset files.
    #[arg(long, default_value = "figures")]
    pub out: PathBuf,
    /// SNR grid (fig2, fig3) or single operating point (fig4-fig6), in dB.
    ///
    /// fig3 plots capacity against Eb/N0 = rho / C in dB, where C is the
    /// Monte-Carlo capacity at each grid point.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Transmitter distortion of the impaired curves.
    #[arg(long = "delta-t", default_value_t = 0.15)]
    pub delta_t: f64,
    /// Receiver distortion of the impaired curves.
    #[arg(long = "delta-r", default_value_t = 0.15)]
    pub delta_r: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Operating SNR for the large-nt limit, in dB.
    #[arg(long = "snr-db", default_value_t = 10.0, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[arg(long, value_enum, default_value_t = MetricsFormat::Text)]
    pub format: MetricsFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricsFormat {
    Text,
    Json,
}

fn with_threads<T>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(job()),
        Some(0) => Err(CliError::InvalidRequest("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::InvalidRequest(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Opens `path` for writing, or standard output for the sentinel.
pub(crate) fn open_output(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == STDOUT_SENTINEL {
        Ok(Box::new(io::stdout().lock()))
    } else {
        let file = File::create(path).map_err(|e| CliError::output(Path::new(path), e))?;
        Ok(Box::new(io::BufWriter::new(file)))
    }
}

/// Run one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(args) => {
            let request = SweepRequest::from_args(&args)?;
            let mut out = open_output(&request.output_path)?;
            let rows = with_threads(args.threads, || run_sweep(&request))??;
            let path = PathBuf::from(&request.output_path);
            write_sweep(&mut out, &request, &rows).map_err(|e| CliError::output(&path, e))?;
            out.flush().map_err(|e| CliError::output(&path, e))
        }
        Command::Figure(args) => {
            let overrides = FigureOverrides::from_args(&args)?;
            let files = with_threads(args.threads, || reproduce_figure(args.id, &overrides))??;
            for file in files {
                eprintln!("wrote {}", file.display());
            }
            Ok(())
        }
        Command::Metrics(args) => {
            let (ant, imp) = args.system.configs()?;
            let report = print_metrics(&ant, &imp, args.snr_db)?;
            let text = match args.format {
                MetricsFormat::Text => report.to_text(),
                MetricsFormat::Json => {
                    serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
                }
            };
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::output(Path::new(STDOUT_SENTINEL), e))
        }
    }
}
