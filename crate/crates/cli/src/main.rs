//! `vulnchar`: validate labeled CVE datasets, cross-validate the six
//! classifiers, test score tables for significance, and train/predict.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vulnchar::corpus::DEFAULT_MIN_CLASS_COUNT;

#[derive(Parser)]
#[command(
    name = "vulnchar",
    version,
    about = "Vulnerability description characterization toolkit"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a labeled dataset: per-class counts, duplicates, small classes.
    Validate(ValidateArgs),
    /// Stratified k-fold cross-validation of one or all algorithms.
    Cv(CvArgs),
    /// Friedman test and Conover post-hoc comparison on an F1 score table.
    Stats(StatsArgs),
    /// Train a model on a whole dataset and save it as JSON.
    Train(TrainArgs),
    /// Characterize a description with a saved model.
    Predict(PredictArgs),
    /// Fetch a CVE description from the NVD (through the local cache).
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Markdown,
    Both,
}

#[derive(Args)]
pub struct OutputArgs {
    /// Directory for report files; reports go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_CLASS_COUNT)]
    min_class_count: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct CvArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Algorithm name (naive_bayes, decision_tree, svm, random_forest,
    /// adaboost_svm, majority_vote) or `all`.
    #[arg(long, default_value = "all")]
    algo: String,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
    #[arg(long, default_value_t = vulnchar::classifiers::DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct StatsArgs {
    /// CSV with a `characteristic` column followed by one column per classifier.
    #[arg(long)]
    scores: PathBuf,
    /// Holm-adjust the pairwise p-values.
    #[arg(long)]
    holm: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = vulnchar::classifiers::DEFAULT_SEED)]
    seed: u64,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["text", "cve"]))]
pub struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Description text to characterize.
    #[arg(long)]
    text: Option<String>,
    /// CVE id whose NVD description is characterized.
    #[arg(long)]
    cve: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
pub struct FetchArgs {
    #[arg(long)]
    cve: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Cv(a) => commands::cv(a),
        Command::Stats(a) => commands::stats(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Fetch(a) => commands::fetch(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
