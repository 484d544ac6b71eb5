//! `nis` — benchmark harness for importance sampling with clipped weights.

mod commands;
mod config;
mod csvout;
mod manifest;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, FileConfig};

/// Environment variable consulted for the default worker count when
/// `--workers` is not given.
const WORKERS_ENV: &str = "NIS_WORKERS";

#[derive(Parser)]
#[command(
    name = "nis",
    version,
    about = "Importance sampling with clipped weights: observation synthesis and IS/NIS benchmark sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic observation set and write it as CSV.
    GenerateObs(RunArgs),
    /// Compare IS and NIS over a list of sample sizes M.
    SweepSamples(RunArgs),
    /// Sweep the NIS clip count M_T against the observation count N.
    SweepClipping(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; omit to run with the built-in defaults.
    #[arg(long, conflicts_with = "from_manifest")]
    config: Option<PathBuf>,

    /// Re-run the exact configuration stored in a previous run's manifest.
    #[arg(long)]
    from_manifest: Option<PathBuf>,

    /// Output file (generate-obs) or directory (sweeps).
    #[arg(long)]
    out: PathBuf,

    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; also set via NIS_WORKERS. Defaults to all cores.
    /// Has no effect on the results, only on wall-clock time.
    #[arg(long)]
    workers: Option<usize>,
}

fn resolve_workers(flag: Option<usize>) -> anyhow::Result<usize> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(value) => value
            .parse::<usize>()
            .with_context(|| format!("{WORKERS_ENV} must be a nonnegative integer, got {value:?}")),
        // 0 lets rayon pick the core count.
        Err(_) => Ok(0),
    }
}

fn resolve_config(args: &RunArgs) -> anyhow::Result<FileConfig> {
    let mut file_config = if let Some(path) = &args.from_manifest {
        manifest::load_manifest(path)?.config
    } else if let Some(path) = &args.config {
        parse_config(path)?
    } else {
        FileConfig::default()
    };
    if let Some(seed) = args.seed {
        file_config.run.master_seed = seed;
    }
    Ok(file_config)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::GenerateObs(a) | Command::SweepSamples(a) | Command::SweepClipping(a) => a,
    };
    let file_config = resolve_config(args)?;
    let workers = resolve_workers(args.workers)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("cannot build worker pool")?;

    pool.install(|| match &cli.command {
        Command::GenerateObs(a) => commands::cmd_generate_obs(&file_config, &a.out),
        Command::SweepSamples(a) => commands::cmd_sweep_samples(&file_config, &a.out),
        Command::SweepClipping(a) => commands::cmd_sweep_clipping(&file_config, &a.out),
    })
}
