mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ConfigFile, Globals};
use crate::error::CliError;

/// Neural circuit synthesis from LTL specifications: pattern mining, dataset
/// generation, training, prediction, evaluation and model checking.
#[derive(Debug, Parser)]
#[command(name = "ltlsyn", version)]
struct Cli {
    /// TOML file with optional top-level `seed` and `workers` keys and
    /// `[gen]`, `[model]`, `[train]` and `[eval]` sections overriding
    /// individual defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed; LTLSYN_SEED takes precedence.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for generation and evaluation (default: available
    /// cores); LTLSYN_WORKERS takes precedence.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    /// Built-in bounded synthesis with deterministic search limits.
    Bounded,
    /// An external synthesis tool speaking the BoSy JSON protocol.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// Small model that trains on a laptop CPU.
    Desk,
    /// 256-wide model with 4 local, 4 global and 8 decoder layers.
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine assumption and guarantee patterns from a directory of BoSy JSON files.
    Mine {
        #[arg(long)]
        corpus: PathBuf,
        /// Pattern pool output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a certified dataset (JSONL splits, manifest, report).
    Gen {
        /// Pattern pool written by `mine`.
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Selects the preset: bounded uses small deterministic settings,
        /// external the full-scale ones.
        #[arg(long, value_enum, default_value = "bounded")]
        oracle: OracleChoice,
        /// Number of samples to keep before rebalancing.
        #[arg(long)]
        target: Option<usize>,
        /// External tool executable.
        #[arg(long)]
        tool: Option<String>,
        /// External tool argument (repeatable); `{input}` and `{timeout}` are substituted.
        #[arg(long = "tool-arg")]
        tool_args: Vec<String>,
    },
    /// Train a model on a generated dataset and save the best checkpoint.
    Train {
        /// Dataset directory with train.jsonl and optionally val.jsonl.
        #[arg(long)]
        data: PathBuf,
        /// Checkpoint output file.
        #[arg(long)]
        out: PathBuf,
        /// Metric log (CSV).
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "desk")]
        scale: Scale,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long)]
        eval_every: Option<usize>,
        /// Stop once training accuracy per sequence reaches this value.
        #[arg(long)]
        target_accuracy: Option<f64>,
    },
    /// Predict circuits for a specification file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        beam: usize,
        /// Greedy decoding (same result as beam size 1).
        #[arg(long, conflicts_with = "beam")]
        greedy: bool,
        /// Model check every candidate.
        #[arg(long)]
        verify: bool,
    },
    /// Syntactic and semantic accuracy of a checkpoint on a dataset split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        /// JSONL file, or a dataset directory (its test.jsonl is used).
        #[arg(long)]
        data: PathBuf,
        /// Report directory.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated beam sizes.
        #[arg(long, value_delimiter = ',')]
        beams: Option<Vec<usize>>,
        /// Dataset name used in the reports.
        #[arg(long)]
        name: Option<String>,
        /// Time budget per candidate verification.
        #[arg(long)]
        verify_secs: Option<f64>,
        /// Evaluate only the first N samples.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Model check an AIGER circuit against a specification.
    Check {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Treat the circuit as an environment counter-strategy.
        #[arg(long)]
        counter_strategy: bool,
        /// Time budget for the check.
        #[arg(long)]
        verify_secs: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    let globals = Globals::resolve(&file, cli.seed, cli.workers)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(globals.workers)
        .build_global()
        .map_err(|e| CliError::Tool(e.to_string()))?;
    match cli.command {
        Command::Mine { corpus, out } => commands::mine(&corpus, &out),
        Command::Gen {
            pool,
            out,
            oracle,
            target,
            tool,
            tool_args,
        } => commands::gen(&file, &globals, &pool, &out, oracle, target, tool, tool_args),
        Command::Train {
            data,
            out,
            metrics,
            scale,
            steps,
            batch_size,
            warmup,
            eval_every,
            target_accuracy,
        } => commands::train(
            &file,
            &globals,
            &data,
            &out,
            metrics.as_deref(),
            scale,
            commands::TrainFlags {
                steps,
                batch_size,
                warmup,
                eval_every,
                target_accuracy,
            },
        ),
        Command::Predict {
            model,
            spec,
            beam,
            greedy,
            verify,
        } => commands::predict(&model, &spec, if greedy { None } else { Some(beam) }, verify),
        Command::Evaluate {
            model,
            data,
            out,
            beams,
            name,
            verify_secs,
            limit,
        } => commands::evaluate(&file, &globals, &model, &data, &out, beams, name, verify_secs, limit),
        Command::Check {
            circuit,
            spec,
            counter_strategy,
            verify_secs,
        } => commands::check(&circuit, &spec, counter_strategy, verify_secs),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
