//! Command-line front end.
//!
//! Exit codes: 0 success, 1 solver failure, 2 configuration error,
//! 3 reproduction-tolerance failure.

use clap::{Args, Parser, Subcommand};
use pide::catalog::CATALOG;
use pide::config::{parse_config, ExperimentConfig, Mode};
use pide::error::Error;
use pide::runner;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pide",
    version,
    about = "Ergodic solvers for periodic integro-differential equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Directory for output files (defaults to the config's output_dir, then "out")
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the solver tolerance from the config
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for randomized probes (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the Cauchy problem and record the trajectory
    SolveCauchy {
        config: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Compute the ergodic pair (vanishing discount or long time, per config)
    SolveErgodic {
        config: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the large-time convergence diagnostic u - lambda t - v
    Convergence {
        config: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Check the standing assumptions for the configured problem
    Audit {
        config: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Re-run a built-in example and compare against its expected metrics
    Reproduce {
        example_id: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// List the built-in examples
    ListExamples,
}

fn load_config(path: &PathBuf, opts: &CommonOpts, forced_mode: Option<&[Mode]>) -> Result<ExperimentConfig, Error> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(tol) = opts.tol {
        if tol <= 0.0 {
            return Err(Error::Config {
                pointer: "--tol".into(),
                message: "tolerance must be positive".into(),
            });
        }
        cfg.params.tol = tol;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(allowed) = forced_mode {
        if !allowed.contains(&cfg.mode) {
            return Err(Error::Config {
                pointer: "/mode".into(),
                message: format!(
                    "mode '{}' does not match this subcommand (expected one of {:?})",
                    cfg.mode.name(),
                    allowed.iter().map(|m| m.name()).collect::<Vec<_>>()
                ),
            });
        }
    }
    Ok(cfg)
}

fn output_dir(opts: &CommonOpts, cfg: Option<&ExperimentConfig>) -> PathBuf {
    opts.output_dir
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.as_ref().map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::Json(_) | Error::UnknownExample(_) => 2,
        _ => 1,
    }
}

fn run_config_command(path: &PathBuf, opts: &CommonOpts, allowed: &[Mode]) -> ExitCode {
    let cfg = match load_config(path, opts, Some(allowed)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let dir = output_dir(opts, Some(&cfg));
    match runner::run_experiment(&cfg, &dir, opts.quiet) {
        Ok(artifacts) if artifacts.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(if cfg.mode == Mode::Reproduce { 3 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::SolveCauchy { config, opts } => {
            run_config_command(&config, &opts, &[Mode::Cauchy])
        }
        Command::SolveErgodic { config, opts } => {
            run_config_command(&config, &opts, &[Mode::ErgodicVd, Mode::ErgodicLt])
        }
        Command::Convergence { config, opts } => {
            run_config_command(&config, &opts, &[Mode::Convergence])
        }
        Command::Audit { config, opts } => run_config_command(&config, &opts, &[Mode::Audit]),
        Command::Reproduce { example_id, opts } => {
            let dir = output_dir(&opts, None);
            match runner::reproduce(&example_id, &dir, opts.tol, opts.quiet) {
                Ok(outcome) if outcome.pass => ExitCode::SUCCESS,
                Ok(_) => ExitCode::from(3),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code_for(&e))
                }
            }
        }
        Command::ListExamples => {
            for entry in &CATALOG {
                println!("{:<18} {}", entry.id, entry.description);
            }
            ExitCode::SUCCESS
        }
    }
}
