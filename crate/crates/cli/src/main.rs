//! `molvae` command-line tool.
//!
//! Exit codes: 0 success, 1 selfcheck failure, 2 unreadable or unwritable
//! input/output, 3 empty result, 4 training divergence, 5 condition or
//! configuration mismatch, 64 usage error.

mod commands;
mod manifest;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use molvae_core::pipeline::PipelineError;

#[derive(Parser)]
#[command(name = "molvae", version, about = "Conditional molecular graph VAE toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a SMILES file into a split, property-annotated dataset cache.
    Preprocess(PreprocessArgs),
    /// Train a model on a dataset cache.
    Train(TrainArgs),
    /// Generate molecules from a checkpoint.
    Sample(SampleArgs),
    /// Score a generation file against a dataset.
    Eval(EvalArgs),
    /// Print ClogP, CMR, QED, SAS and Ghose flags for SMILES.
    Props(PropsArgs),
    /// Gradient, codec, KL and property-table checks.
    Selfcheck,
    /// Train, sample and evaluate over a list of β values.
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct PreprocessArgs {
    /// Line-oriented SMILES file; the first field of each line is used.
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub max_atoms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep this many molecules after filtering; 0 keeps all.
    #[arg(long, default_value_t = 20000)]
    pub subsample: usize,
    /// Reject every line containing `-`, explicit single bonds included.
    #[arg(long)]
    pub reject_literal_minus: bool,
}

#[derive(Args, Clone)]
pub struct ModelArgs {
    /// `adam` or `hyperadam`.
    #[arg(long, default_value = "adam")]
    pub optimizer: String,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,
    /// Meta step size of the hypergradient learning-rate update.
    #[arg(long, default_value_t = 1e-3)]
    pub hyper_lr: f64,
    /// Conditioned properties: `none` or a list such as `clogp,cmr`.
    #[arg(long, default_value = "none")]
    pub conditions: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "1024,512")]
    pub encoder_hidden: Vec<usize>,
    #[arg(long, default_value_t = 128)]
    pub latent: usize,
    #[arg(long, value_delimiter = ',', default_value = "512,1024")]
    pub decoder_hidden: Vec<usize>,
    /// Also write a checkpoint every this many epochs.
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset cache written by `preprocess`.
    pub cache: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Objective name; chosen from β and conditions when omitted.
    #[arg(long)]
    pub objective: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Continue from a checkpoint; its configuration is used, with
    /// `--epochs` as the new target.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args)]
pub struct SampleArgs {
    pub checkpoint: PathBuf,
    /// Scaled targets such as `c1=2,c2=6.0`, or `none`.
    #[arg(long, default_value = "none")]
    pub condition: String,
    #[arg(short, long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub allow_offgrid: bool,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Generation TSV written by `sample`.
    pub generation: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Score against this condition instead of the one in the file.
    #[arg(long)]
    pub condition: Option<String>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also report similarity-threshold novelty and uniqueness.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub exemplars: usize,
    /// Checkpoint recorded in the report metadata.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Args)]
pub struct PropsArgs {
    /// SMILES strings; read from stdin when none are given.
    pub smiles: Vec<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct SweepArgs {
    pub cache: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.5,1,2,5,10")]
    pub betas: Vec<f64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "none")]
    pub condition: String,
    #[arg(short, long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

pub const EXIT_SELFCHECK: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_EMPTY: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;
pub const EXIT_USAGE: u8 = 64;

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Io(_) | PipelineError::Format(_) => EXIT_IO,
            PipelineError::Empty(_) => EXIT_EMPTY,
            PipelineError::Divergence { .. } => EXIT_DIVERGED,
            PipelineError::ConditionMismatch(_)
            | PipelineError::OffGrid(_)
            | PipelineError::Config(_)
            | PipelineError::Nn(_)
            | PipelineError::Optim(_) => EXIT_MISMATCH,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_IO, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Preprocess(a) => commands::preprocess(&a),
        Command::Train(a) => commands::train(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Props(a) => commands::props(&a),
        Command::Selfcheck => selfcheck::run(),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
