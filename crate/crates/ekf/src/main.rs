use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ekf::{run_stage, EkfError, PipelineConfig, Stage};

/// Build an event- and quote-centric knowledge graph from wiki markup.
///
/// Stages read earlier artifacts from the configured output directory and
/// write their own. Exit status: 0 success, 1 invalid config or usage,
/// 2 runtime failure.
#[derive(Debug, Parser)]
#[command(name = "ekf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct StageArgs {
    /// Pipeline config file (flat TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Worker threads for per-page and per-person work [default: number of CPUs].
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the corpus into pages.jsonl.
    Ingest(StageArgs),
    /// Extract quote mentions into mentions.jsonl and persons.jsonl.
    Quotes(StageArgs),
    /// Cluster each person's mentions into clusters.jsonl.
    Align(StageArgs),
    /// Resolve event mentions to ontology classes in subevents.jsonl.
    Resolve(StageArgs),
    /// Write the knowledge graph as kg.nt.
    Emit(StageArgs),
    /// Write per-language statistics as stats.tsv.
    Stats(StageArgs),
    /// Build the gold test set and score the resolver into eval.tsv.
    Eval(StageArgs),
}

impl Command {
    fn split(self) -> (Stage, StageArgs) {
        match self {
            Command::Ingest(a) => (Stage::Ingest, a),
            Command::Quotes(a) => (Stage::Quotes, a),
            Command::Align(a) => (Stage::Align, a),
            Command::Resolve(a) => (Stage::Resolve, a),
            Command::Emit(a) => (Stage::Emit, a),
            Command::Stats(a) => (Stage::Stats, a),
            Command::Eval(a) => (Stage::Eval, a),
        }
    }
}

fn run(stage: Stage, args: &StageArgs) -> Result<String, EkfError> {
    let cfg = PipelineConfig::load(&args.config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.jobs {
        pool = pool.num_threads(n.into());
    }
    let pool = pool.build().map_err(|e| EkfError::ThreadPool(e.to_string()))?;
    pool.install(|| run_stage(stage, &cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (stage, args) = cli.command.split();
    match run(stage, &args) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ekf {}: error: {e}", stage.name());
            ExitCode::from(e.exit_code())
        }
    }
}
