//! `driftclass` — seeded Monte Carlo experiments for drift-based
//! classification of diffusion paths.
//!
//! Exit codes: 0 = all verdicts pass or inconclusive, 1 = a falsified
//! verdict, 2 = usage or configuration error.

use clap::{Args, Parser, Subcommand};
use driftclass::harness::{self, Experiment};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "driftclass", version, about = "Diffusion-path classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Excess-risk rate campaign over a grid of sample sizes.
    Rates(RunArgs),
    /// Estimator tail frequencies against the deviation bound.
    Tails(RunArgs),
    /// Low-noise margin probe and noise-functional diagnostics.
    Margin(RunArgs),
    /// Bias-halving study of the kernel estimators.
    Bias(RunArgs),
    /// Rate-floor campaign on the hypercube drift family.
    Floor(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = library default); falls back to
    /// DRIFTCLASS_THREADS, then the config.
    #[arg(long)]
    threads: Option<usize>,
}

fn experiment_of(command: &Command) -> Experiment {
    match command {
        Command::Rates(_) => Experiment::Rates,
        Command::Tails(_) => Experiment::Tails,
        Command::Margin(_) => Experiment::Margin,
        Command::Bias(_) => Experiment::Bias,
        Command::Floor(_) => Experiment::Floor,
    }
}

fn run_args(command: &Command) -> &RunArgs {
    match command {
        Command::Rates(a)
        | Command::Tails(a)
        | Command::Margin(a)
        | Command::Bias(a)
        | Command::Floor(a) => a,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let wanted = experiment_of(&cli.command);
    let args = run_args(&cli.command);

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match harness::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if cfg.experiment != wanted {
        eprintln!(
            "error: config selects experiment `{}` but the `{}` subcommand was invoked",
            cfg.experiment.name(),
            wanted.name()
        );
        return ExitCode::from(2);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    let env_threads = std::env::var("DRIFTCLASS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(threads) = args.threads.or(env_threads) {
        cfg.threads = threads;
    }

    match harness::run(&cfg) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            println!(
                "outputs written to {} (seed {})",
                cfg.output_dir.display(),
                cfg.seed
            );
            if outcome.falsified {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
