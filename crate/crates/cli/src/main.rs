use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use lrthcr_cli::{preset, run_experiment, write_outputs, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lrthcr", version, about = "Non-circular harmonic retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized estimation error versus K and L.
    Fig1(RunArgs),
    /// RMSE versus SNR.
    Fig2(RunArgs),
    /// RMSE versus the number of snapshots.
    Fig3(RunArgs),
    /// Any sweep described by a configuration file.
    Custom(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; defaults to the bundled one for the figure.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn load(experiment: Experiment, args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if experiment == Experiment::Custom => anyhow::bail!("custom requires --config"),
        None => preset(experiment),
    };
    if cfg.experiment != experiment {
        anyhow::bail!("configuration is for {}, not {}", cfg.experiment.name(), experiment.name());
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(experiment: Experiment, args: RunArgs) -> anyhow::Result<()> {
    let cfg = load(experiment, &args)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build()?;
    let start = Instant::now();
    let records = pool.install(|| run_experiment(&cfg))?;
    let elapsed = start.elapsed().as_secs_f64();
    let path = write_outputs(&args.out, &cfg, &records, elapsed)
        .with_context(|| format!("writing results to {}", args.out.display()))?;
    log::info!("{} records in {elapsed:.1} s", records.len());
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Fig1(a) => (Experiment::Fig1, a),
        Command::Fig2(a) => (Experiment::Fig2, a),
        Command::Fig3(a) => (Experiment::Fig3, a),
        Command::Custom(a) => (Experiment::Custom, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
