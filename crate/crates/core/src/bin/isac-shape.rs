use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use isac_shaping::harness::{self, Command, ExperimentConfig, Failure};

/// Constellation shaping experiments for OFDM sensing and communications.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment config.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Training steps (optimize, tradeoff-sweep).
    #[arg(long)]
    steps: Option<usize>,
    /// Monte-Carlo trials per point (pd-curve, gaussianity).
    #[arg(long)]
    trials: Option<usize>,
    /// Symbols per GMI estimate (gmi-curve, tradeoff-sweep).
    #[arg(long)]
    batch: Option<usize>,
}

fn workers() -> Result<(), Failure> {
    let Ok(v) = std::env::var("ISAC_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("ISAC_WORKERS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Failure> {
    workers()?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    if cli.steps.is_some() {
        cfg.train.steps = cli.steps;
    }
    if cli.trials.is_some() {
        cfg.trials = cli.trials;
    }
    if cli.batch.is_some() {
        cfg.batch = cli.batch;
    }
    let io = |e: std::io::Error| Failure::Config(format!("{}: {e}", cfg.output_dir.display()));
    match harness::run(cli.command, &cfg) {
        Ok(artifacts) => harness::write_artifacts(&cfg.output_dir, &artifacts).map_err(io),
        Err(Failure::Numerical { msg, partial }) => {
            harness::write_artifacts(&cfg.output_dir, &partial).map_err(io)?;
            Err(Failure::Numerical { msg, partial: Vec::new() })
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("isac-shape {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
