//! `ashjb`: configuration, orchestration and CSV/JSON emission for the
//! credible-band pipeline.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver or I/O failure,
//! 4 a requested check failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod pipeline;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use ashjb_core::Execution;
use clap::{Parser, Subcommand};

use config::{apply_override, load_value, parse, ConfigError, Emit};
use pipeline::{stages_for, Pipeline, Stage};

#[derive(Debug, Parser)]
#[command(name = "ashjb", version, about = "Credible-band HJB solver for two-type adverse-selection contracting")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file, or one of the bundled presets `dominated`, `nondominated`.
    #[arg(long, global = true, default_value = "dominated")]
    config: String,

    /// Overrides a config leaf by dotted path, e.g. `--set grid.n_time=60`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Monte Carlo seed (`sim.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true, env = "ASHJB_THREADS")]
    threads: Option<usize>,

    /// Runs every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Re-checks the CSVs already in the output directory without solving.
    #[arg(long, global = true)]
    check_only: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Band edges W̲(t), W̄(t).
    Band,
    /// Lateral boundary values of the interior and screening problems.
    Boundary,
    /// Interior value field and feedback policy.
    Solve,
    /// Conditional and unconditional single-contract values over the prior sweep.
    Values,
    /// Screening menus over the prior sweep.
    Screen,
    /// Monte Carlo rollout of the solved policy.
    Simulate,
    /// The three principal values side by side with the ordering flag.
    Compare,
    /// Every stage needed for the artifacts listed in `emit`.
    Run,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Band => "band",
            Command::Boundary => "boundary",
            Command::Solve => "solve",
            Command::Values => "values",
            Command::Screen => "screen",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Run => "run",
        }
    }

    /// Stages and artifacts of a single subcommand; `run` follows the config.
    fn plan(self, configured: &BTreeSet<Emit>) -> (BTreeSet<Stage>, BTreeSet<Emit>) {
        let (stage, artifact) = match self {
            Command::Band => (Stage::Band, Some(Emit::Band)),
            Command::Boundary => (Stage::Boundary, Some(Emit::Boundary)),
            Command::Solve => (Stage::Solve, Some(Emit::Field)),
            Command::Values => (Stage::Values, Some(Emit::Values)),
            Command::Screen => (Stage::Screen, Some(Emit::Screening)),
            Command::Simulate => (Stage::Simulate, configured.get(&Emit::Trajectories).copied()),
            Command::Compare => (Stage::Compare, None),
            Command::Run => return (stages_for(configured), configured.clone()),
        };
        let emit = artifact.into_iter().chain([Emit::Summary]).collect();
        (stage.closure(), emit)
    }
}

fn load(cli: &Cli) -> Result<config::RunConfig, ConfigError> {
    let mut value = load_value(&cli.config)?;
    for s in &cli.sets {
        apply_override(&mut value, s)?;
    }
    if let Some(dir) = &cli.output_dir {
        apply_override(&mut value, &format!("output_dir={}", serde_json::json!(dir)))?;
    }
    if let Some(seed) = cli.seed {
        apply_override(&mut value, &format!("sim.seed={seed}"))?;
    }
    parse(value)
}

fn configure_threads(threads: Option<usize>) -> Result<(), ConfigError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(ConfigError("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli).and_then(|c| configure_threads(cli.threads).map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let result = if cli.check_only {
        Pipeline::new(cfg, exec, BTreeSet::new()).check_only()
    } else {
        let (stages, emit) = cli.command.plan(&cfg.emit);
        Pipeline::new(cfg, exec, emit).run(cli.command.name(), &stages)
    };
    match result {
        Ok(o) if o.failed_checks.is_empty() => {
            eprintln!("all checks passed");
            ExitCode::SUCCESS
        }
        Ok(o) => {
            eprintln!("failed checks: {}", o.failed_checks.join(", "));
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
