mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jobfit_core::pipeline::Strategy;
use tracing_subscriber::EnvFilter;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "jobfit", version, about = "Listwise resume re-ranking toolkit")]
struct Cli {
    /// TOML run configuration. Built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured run seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Record per-window ranker calls (rerank writes rerank_trace.jsonl).
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    All,
    RemoveHard,
    SubsampleHard,
    HintAugment,
    LlmFilter,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::All => Strategy::All,
            StrategyArg::RemoveHard => Strategy::RemoveHard,
            StrategyArg::SubsampleHard => Strategy::SubsampleHard,
            StrategyArg::HintAugment => Strategy::HintAugment,
            StrategyArg::LlmFilter => Strategy::LlmFilter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    Informative,
    Noise,
    /// Text-overlap features over windows built from the corpus.
    Windows,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic corpus, labels and retrieval pools to the configured paths.
    GenSynthetic {
        /// Number of jobs (overrides `synthetic.jobs`).
        #[arg(long)]
        n_jobs: Option<usize>,
    },
    /// Build training windows from the labelled pools.
    BuildWindows {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate per-window difficulty with repeated ranker calls.
    Annotate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Apply a data strategy to annotated windows.
    Filter {
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-rank every pool with the sliding-window engine.
    Rerank,
    /// Score re-ranked pools against the retrieval order.
    Evaluate {
        #[arg(long)]
        reranked: Option<PathBuf>,
    },
    /// Evaluate a grid of window/stride settings.
    Ablate {
        /// Comma-separated `window:stride` pairs, e.g. `4:2,3:1`.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<String>,
    },
    /// Keep teacher outputs that rank the accepted candidate first.
    Distill {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train a linear listwise policy with GRPO.
    SimulateGrpo {
        #[arg(long, value_enum, default_value = "informative")]
        task: TaskArg,
        /// Windows file for `--task windows`.
        #[arg(long)]
        windows: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        n_windows: usize,
        #[arg(long, default_value_t = 4)]
        window_size: usize,
    },
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Degraded,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?.finalize(cli.seed)?;
    match cli.command {
        Command::GenSynthetic { n_jobs } => commands::gen_synthetic(&cfg, n_jobs),
        Command::BuildWindows { output } => commands::build_windows(&cfg, output),
        Command::Annotate { input, output } => commands::annotate(&cfg, input, output),
        Command::Filter {
            strategy,
            input,
            output,
        } => commands::filter(&cfg, strategy.into(), input, output),
        Command::Rerank => commands::rerank(&cfg, cli.trace),
        Command::Evaluate { reranked } => commands::evaluate(&cfg, reranked),
        Command::Ablate { grid } => commands::ablate(&cfg, &grid),
        Command::Distill { input, output } => commands::distill(&cfg, input, output),
        Command::SimulateGrpo {
            task,
            windows,
            n_windows,
            window_size,
        } => {
            let task = match task {
                TaskArg::Informative => {
                    commands::GrpoTask::Synthetic(jobfit_core::grpo::TaskKind::Informative)
                }
                TaskArg::Noise => commands::GrpoTask::Synthetic(jobfit_core::grpo::TaskKind::Noise),
                TaskArg::Windows => {
                    commands::GrpoTask::Windows(windows.unwrap_or_else(|| cfg.out("windows.jsonl")))
                }
            };
            commands::simulate_grpo(&cfg, task, n_windows, window_size)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .init();
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Degraded) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
