//! `chunkbench`: chunk a corpus four ways, embed, index, retrieve and score.

mod commands;
mod config;
mod error;
mod workdir;

use std::path::PathBuf;
use std::process::ExitCode;

use chunkbench_core::embedding::ProviderKind;
use chunkbench_core::evaluation::ReportFormat;
use clap::{Args, Parser, Subcommand};

use crate::commands::{Ctx, Progress};

#[derive(Parser, Debug)]
#[command(name = "chunkbench", version, about = "Compare document chunking strategies by retrieval quality")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for stage artifacts and reports.
    #[arg(long, global = true)]
    workdir: Option<PathBuf>,

    /// Corpus JSONL, overriding the config.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,

    /// Question-answer JSONL, overriding the config.
    #[arg(long, global = true)]
    qa: Option<PathBuf>,

    /// Fold shuffle seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_parser = parse_provider)]
    provider: Option<ProviderKind>,

    /// Remote embedding service base URL.
    #[arg(long, global = true, env = "CHUNKBENCH_ENDPOINT")]
    endpoint: Option<String>,

    /// Comma-separated subset of: recursive, khmer_aware, sentence, llm.
    #[arg(long, global = true, value_delimiter = ',')]
    methods: Vec<String>,

    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,

    /// Report formats to write (md, json, csv); repeat or comma-separate.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<ReportFormat>,

    /// Print machine-readable output to stdout instead of writing it.
    #[arg(long, global = true)]
    stdout: bool,
}

fn parse_provider(s: &str) -> Result<ProviderKind, String> {
    match s {
        "deterministic" => Ok(ProviderKind::Deterministic),
        "remote" => Ok(ProviderKind::Remote),
        _ => Err(format!("unknown provider {s:?} (deterministic or remote)")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split the corpus with each selected method.
    Chunk,
    /// Embed chunk, question and answer texts into the cache.
    Embed,
    /// Build one exact index per method.
    Index,
    /// Retrieve, score, cross-validate and write reports.
    Evaluate {
        /// Run chunking and indexing first.
        #[arg(long)]
        all: bool,
    },
    /// Paired t-test between two methods from a saved report.
    Compare {
        method_a: String,
        method_b: String,
        #[arg(long, default_value = "avg_l2")]
        metric: String,
        /// per_question or per_fold; defaults to the report's pairing.
        #[arg(long)]
        pairing: Option<String>,
        /// Report JSON; defaults to <workdir>/report.json.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-render report files from a saved report JSON.
    Report {
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), error::CliError> {
    let cfg = config::load(&cli.global)?;
    let ctx = Ctx { cfg, args: &cli.global, out: Progress::new(&cli.global) };
    match &cli.command {
        Command::Chunk => commands::chunk(&ctx),
        Command::Embed => commands::embed(&ctx),
        Command::Index => commands::index(&ctx),
        Command::Evaluate { all } => commands::evaluate(&ctx, *all),
        Command::Compare { method_a, method_b, metric, pairing, report } => {
            commands::compare(&ctx, report.as_deref(), method_a, method_b, metric, pairing.as_deref())
        }
        Command::Report { report } => commands::report(&ctx, report.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
