//! Command-line interface: `fit`, `predict`, `simulate`, `evaluate` and
//! `generate`.
//!
//! Exit codes: 0 on success, 1 when the run fails, 2 on a usage error.

mod commands;
mod files;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::regress::UpdateForm;

#[derive(Debug, Parser)]
#[command(name = "maslda", version, about = "Multi-annotator supervised topic models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a corpus and its annotations.
    Fit(FitArgs),
    /// Predict labels or targets for a corpus.
    Predict(PredictArgs),
    /// Simulate annotators from true labels or targets.
    Simulate(SimulateArgs),
    /// Score predictions against the truth and append to a metrics file.
    Evaluate(EvaluateArgs),
    /// Sample a synthetic corpus with known labels or targets.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Classify,
    Regress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Batch,
    Svi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Accuracy,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Derived,
    Printed,
}

impl From<Form> for UpdateForm {
    fn from(f: Form) -> Self {
        match f {
            Form::Derived => UpdateForm::Derived,
            Form::Printed => UpdateForm::Printed,
        }
    }
}

#[derive(Debug, Args)]
pub struct Threads {
    /// Worker threads for the E-step; 1 runs sequentially.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    #[arg(long, value_enum, default_value = "batch")]
    pub mode: Mode,
    #[arg(long)]
    pub topics: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Number of classes; inferred from the labels when omitted.
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.6)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delay: f64,
    /// EM iterations (batch) or epochs (svi).
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Relative ELBO change that stops the run.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "derived")]
    pub update_form: Form,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub threads: Threads,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub threads: Threads,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON annotator profile.
    #[arg(long)]
    pub profile: PathBuf,
    /// CSV with header `doc_id,truth`.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub preds: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, value_enum)]
    pub metric: Metric,
    #[arg(long)]
    pub out: PathBuf,
    /// Run label written to the metrics file.
    #[arg(long, default_value = "run")]
    pub run: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub topics: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    #[arg(long, default_value_t = 5)]
    pub topics: usize,
    #[arg(long, default_value_t = 500)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 1000)]
    pub docs: usize,
    #[arg(long, default_value_t = 80)]
    pub doc_length: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    /// Standard deviation of the sampled η entries.
    #[arg(long, default_value_t = 6.0)]
    pub eta_scale: f64,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub topic_concentration: f64,
    /// Variance of the targets around ηᵀz̄ (regress only).
    #[arg(long, default_value_t = 0.25)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving corpus.txt, vocab.txt and truth.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
