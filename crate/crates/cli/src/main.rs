use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use readmit_cli::stages::{self, ExplainOptions};
use readmit_cli::{exit_code, PipelineConfig, UsageError};

/// Readmission risk from discharge notes: synthetic data, preprocessing,
/// embeddings, CNN training, evaluation, explanations and baselines.
#[derive(Parser)]
#[command(name = "readmit", version)]
struct Cli {
    /// Pipeline config (TOML). Relative paths inside it resolve against its directory.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set train.max_epochs=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus, name lexicon and ground truth.
    Synth,
    /// Label, exclude, split and prepare notes.
    Preprocess,
    /// Build the vocabulary from the training fold.
    Vocab,
    /// Train skip-gram embeddings on the training fold.
    Embed,
    /// Train the CNN with early stopping on the validation fold.
    Train,
    /// Score the test fold.
    Evaluate,
    /// Write HTML explanations for test visits.
    Explain {
        /// Explain a single visit.
        #[arg(long)]
        visit: Option<String>,
        /// Also print colored reports to standard error.
        #[arg(long)]
        terminal: bool,
    },
    /// Profile every max-pool node over the test fold.
    Profile,
    /// Fit and score the LACE and TF-IDF baselines.
    Baseline,
    /// Print the effective config.
    Config,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = PipelineConfig::load(cli.config.as_deref(), &cli.overrides).map_err(|e| UsageError(format!("{e:#}")))?;
    let summary = match cli.command {
        Command::Synth => stages::synth(&cfg),
        Command::Preprocess => stages::preprocess(&cfg),
        Command::Vocab => stages::vocab(&cfg),
        Command::Embed => stages::embed(&cfg),
        Command::Train => stages::train(&cfg),
        Command::Evaluate => stages::evaluate(&cfg),
        Command::Explain { visit, terminal } => stages::explain(&cfg, &ExplainOptions { visit, terminal }),
        Command::Profile => stages::profile(&cfg),
        Command::Baseline => stages::baseline(&cfg),
        Command::Config => {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
    }?;
    println!("{}", serde_json::to_string(&summary).context("summary does not serialise")?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("readmit: {e:#}");
            exit_code(&e)
        }
    }
}
