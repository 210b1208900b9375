//! `mtbudget`: run budgeted multitask learners on datasets or synthetic
//! streams, and audit the graph identity and mistake bounds.

mod audit;
mod run;
mod source;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mtbudget::graph::GraphSpec;
use mtbudget::learners::{Algorithm, BackProjection};
use mtbudget::{BudgetSpec, KernelSpec64};

use crate::source::{SourceArgs, SynthArgs};

#[derive(Debug, Parser)]
#[command(name = "mtbudget", version, about = "Multitask online learning on a fixed active-set budget")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run budgeted learners over a stream; comma-separated lists run as a grid.
    Run(RunArgs),
    /// Run the unbudgeted battery of per-task Perceptrons.
    Baseline(BaselineArgs),
    /// Check the resistance-distance formula for A_G⁻¹ on random graphs.
    VerifyGraph(audit::VerifyArgs),
    /// Evaluate the mistake bounds.
    Bounds(audit::BoundsArgs),
    /// Write a synthetic multitask dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// One CSV row per run, with wall-clock time.
    #[arg(long, conflicts_with = "table")]
    csv: bool,
    /// Aligned human-readable table.
    #[arg(long)]
    table: bool,
}

impl OutputArgs {
    fn format(&self) -> Format {
        match (self.csv, self.table) {
            (true, _) => Format::Csv,
            (_, true) => Format::Table,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// `mtbprj`, `mtbprj2`, `mtrbp`, `mtforg`
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_algorithm)]
    algo: Vec<Algorithm>,
    /// `complete`, `disconnected`, or a graph file.
    #[arg(long, value_delimiter = ',', default_value = "complete")]
    graph: Vec<GraphSpec>,
    /// Absolute size or percentage of the baseline active set, e.g. `10%`.
    #[arg(long, value_delimiter = ',', required = true)]
    budget: Vec<BudgetSpec>,
    /// `linear`, `poly:<degree>:<offset>` or `gauss:<gamma>`, with `:norm`.
    #[arg(long)]
    kernel: KernelSpec64,
    /// Projection threshold of the Projectron variants.
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    /// Seeds for the mtrbp eviction draws.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    epochs: u32,
    /// How mtbprj2 folds an evicted entry back into the survivors.
    #[arg(long, default_value = "coupled", value_parser = parse_back_projection)]
    back_projection: BackProjection,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    kernel: KernelSpec64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    epochs: u32,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: mtbudget::LearnerError| e.to_string())
}

fn parse_back_projection(s: &str) -> Result<BackProjection, String> {
    s.parse().map_err(|e: mtbudget::LearnerError| e.to_string())
}

/// Failure after argument parsing; usage errors share clap's exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Run(args) => run::run(&args, &mut stdout),
        Command::Baseline(args) => run::baseline(&args, &mut stdout),
        Command::VerifyGraph(args) => audit::verify_graph(&args, &mut stdout),
        Command::Bounds(args) => audit::bounds(&args, &mut stdout),
        Command::Synth(args) => source::synth(&args, &mut stdout),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
