//! `relclass`: train, evaluate and analyse relation classifiers from the
//! command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::TrainOverrides;

#[derive(Debug, Parser)]
#[command(
    name = "relclass",
    version,
    about = "Relation classification with RNN and CNN sentence encoders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write it with its per-epoch log.
    Train {
        /// TOML file with default settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Box<TrainOverrides>,
    },
    /// Score a trained model on a labelled file.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Context-length cut points for a bucketed breakdown, e.g. `10,15`.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        buckets: Option<Vec<usize>>,
        /// Add the neutral class to the macro average (diagnostic only).
        #[arg(long)]
        include_neutral: bool,
        /// Directory for `report.txt` and `predictions.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a raw KBP slot-filling corpus into directed train/dev/test files.
    RefineKbp {
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// A relation is kept only if each direction occurs more often than this.
        #[arg(long, default_value_t = 100)]
        min_per_direction: usize,
    },
    /// Per-token semantic contributions and neighbour variance.
    Analyze {
        /// One or more model files; each is profiled on the same sentences.
        #[arg(long, required = true, num_args = 1..)]
        model: Vec<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare backpropagated gradients with finite differences on random small models.
    Gradcheck {
        #[arg(long, default_value = "rnn")]
        encoder: String,
        #[arg(long, default_value = "pi")]
        mode: String,
        #[arg(long, default_value_t = 4)]
        hidden: usize,
        #[arg(long = "word-dim", default_value_t = 3)]
        word_dim: usize,
        /// Sentence length in tokens.
        #[arg(long, default_value_t = 5)]
        length: usize,
        #[arg(long, default_value_t = 3)]
        relations: usize,
        #[arg(long, default_value_t = 10)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { config, overrides } => commands::run_train(config.as_deref(), *overrides),
        Command::Evaluate {
            model,
            test,
            buckets,
            include_neutral,
            out,
        } => commands::run_evaluate(&model, &test, buckets, include_neutral, out.as_deref()),
        Command::RefineKbp {
            raw,
            seed,
            out,
            min_per_direction,
        } => commands::run_refine_kbp(&raw, seed, &out, min_per_direction),
        Command::Analyze { model, test, out } => commands::run_analyze(&model, &test, &out),
        Command::Gradcheck {
            encoder,
            mode,
            hidden,
            word_dim,
            length,
            relations,
            cases,
            seed,
        } => commands::run_gradcheck(&commands::GradcheckArgs {
            encoder,
            mode,
            hidden,
            word_dim,
            length,
            relations,
            cases,
            seed,
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
