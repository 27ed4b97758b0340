//! Command-line workflows: sampling, benchmarking against the spectrally
//! uniform proposal, parallel speedup, two-mode validation and extreme-event
//! extraction.

pub mod commands;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub const OUTPUT_DIR_ENV: &str = "TKDV_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "tkdv", version, about = "Rejection sampling of the truncated KdV Gibbs measure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw an ensemble and write its statistics.
    Sample(SampleArgs),
    /// Acceptance rates of the improved and naive proposals over a parameter grid.
    Bench(BenchArgs),
    /// Wall-clock speedup versus number of workers.
    Speedup(SpeedupArgs),
    /// Compare the general Hamiltonian evaluation with the two-mode closed forms.
    Validate(ValidateArgs),
    /// Extract the most extreme wave field of an ensemble.
    Extreme(ExtremeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProposalKind {
    Improved,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SkewArg {
    Pooled,
    PerField,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Cutoff wavenumber.
    #[arg(long = "K", default_value_t = 16)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    #[arg(long, default_value_t = 20.0)]
    pub beta_prime: f64,
    /// Nonlinearity-to-dispersion ratio C3/C2.
    #[arg(long, default_value_t = 0.0)]
    pub nonlin_ratio: f64,
    /// Proposal scaling α in place of the self-consistent α*; needed when
    /// α* has no root (small K or very large β').
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Target number of accepted samples.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Proposal budget; with --samples, whichever is hit first stops the run.
    #[arg(long)]
    pub max_proposals: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Grid points per wave field (default 2K).
    #[arg(long)]
    pub n_grid: Option<usize>,
    /// Output directory.
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Re-optimize M and restart this many times if a proposal beats it.
    #[arg(long, default_value_t = 0)]
    pub max_refinements: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = tkdv_core::stats::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = ProposalKind::Improved)]
    pub proposal: ProposalKind,
    #[arg(long, value_enum, default_value_t = SkewArg::Pooled)]
    pub skewness: SkewArg,
    /// Also write every accepted spectrum.
    #[arg(long)]
    pub dump_spectra: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long = "K", default_value_t = 16)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    /// Parameter rows as BETA:RATIO, comma separated (e.g. 20:0,20:60,40:0).
    #[arg(long, value_delimiter = ',', required = true)]
    pub rows: Vec<String>,
    /// Improved-proposal budget per row.
    #[arg(long, default_value_t = 100_000)]
    pub improved_proposals: u64,
    /// Stop the improved run early once this many samples are accepted.
    #[arg(long)]
    pub improved_samples: Option<u64>,
    /// Naive-proposal budget per row.
    #[arg(long, default_value_t = 1_000_000)]
    pub naive_proposals: u64,
    /// Naive accepts required for an uncensored factor.
    #[arg(long, default_value_t = 100)]
    pub min_naive_accepts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SpeedupArgs {
    #[arg(long = "K", default_value_t = 128)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    #[arg(long, default_value_t = 20.0)]
    pub beta_prime: f64,
    #[arg(long, default_value_t = 0.0)]
    pub nonlin_ratio: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub proposals_per_worker: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ExtremeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::InsufficientData(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<tkdv_core::Error> for CliError {
    fn from(e: tkdv_core::Error) -> Self {
        use tkdv_core::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidState { .. } | E::Degenerate | E::Resolution { .. } => {
                CliError::Usage(e.to_string())
            }
            E::Bracket { .. } | E::Optimization { .. } | E::ConstantViolation { .. } => {
                CliError::Numerical(e.to_string())
            }
            E::InsufficientData(_) => CliError::InsufficientData(e.to_string()),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(a) => commands::cmd_sample(&a).map(|_| ()),
        Command::Bench(a) => commands::cmd_bench(&a).map(|_| ()),
        Command::Speedup(a) => commands::cmd_speedup(&a).map(|_| ()),
        Command::Validate(a) => commands::cmd_validate(&a).map(|_| ()),
        Command::Extreme(a) => commands::cmd_extreme(&a).map(|_| ()),
    }
}
