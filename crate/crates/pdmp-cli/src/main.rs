//! `pdmp-bench`: benchmark runner for the PDMP sampler library.
//!
//! Subcommands:
//! * `run` — execute an experiment config (replicates, CSV reports);
//! * `simulate-data` — generate a benchmark dataset CSV;
//! * `compare` — multi-sampler comparison with KS and efficiency ratios.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

mod compare;
mod config;
mod experiment;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "pdmp-bench", version, about = "PDMP sampler benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment or dataset configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the base seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replicate execution (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write replicate + aggregate reports.
    Run(CommonArgs),
    /// Simulate a benchmark dataset and write it as CSV.
    SimulateData(CommonArgs),
    /// Compare two or more samplers under a shared budget.
    Compare(CommonArgs),
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            init_threads(args.threads)?;
            let config = config::ExperimentConfig::load(&args.config)?;
            let seed = args.seed.unwrap_or(config.seed);
            let out_dir = output_dir(&args, &config)?;
            let outcomes = experiment::run_experiment(&config, seed)?;
            let groups = report::aggregate(&outcomes);
            report::write_outputs(&out_dir, &config.name, &config.budget_label(), &outcomes, &groups)?;
            println!("wrote {}", out_dir.display());
            Ok(())
        }
        Command::SimulateData(args) => {
            init_threads(args.threads)?;
            simulate::run(&args.config, args.seed, args.out.as_deref())
        }
        Command::Compare(args) => {
            init_threads(args.threads)?;
            let config = config::ExperimentConfig::load(&args.config)?;
            let seed = args.seed.unwrap_or(config.seed);
            let out_dir = output_dir(&args, &config)?;
            compare::run(&config, seed, &out_dir)
        }
    }
}

fn output_dir(args: &CommonArgs, config: &config::ExperimentConfig) -> Result<PathBuf, CliError> {
    let base = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: set out_dir or pass --out".into()))?;
    let dir = base.join(&config.name);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Runtime(_) => ExitCode::from(1),
            }
        }
    }
}
