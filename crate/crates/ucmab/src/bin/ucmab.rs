//! Experiment runner CLI.
//!
//! Exit codes: 0 ok, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ucmab::config::ExperimentConfig;
use ucmab::runner::{self, RunnerError};

#[derive(Parser)]
#[command(name = "ucmab", version, about = "Uplift bandit experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the drift simulation experiment from a config file.
    Simulate(RunArgs),
    /// Fit the uplift forest on a dataset and emit its qini curve.
    Qini(RunArgs),
    /// Parse and validate a config file without running anything.
    Validate { config: PathBuf },
}

#[derive(clap::Args)]
struct RunArgs {
    config: PathBuf,
    /// Replace the config's seed list with a single seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Output directory (defaults to the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for seed-level parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), RunnerError> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed_override {
        config.seeds = vec![seed];
    }
    let out = args.out.clone().unwrap_or_else(|| config.output.clone());
    Ok((config, out))
}

fn exit_code_for(err: &RunnerError) -> ExitCode {
    match err {
        RunnerError::Config(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), RunnerError> = (|| {
        match &cli.command {
            Command::Validate { config } => {
                ExperimentConfig::from_path(config)?;
                println!("config ok");
                Ok(())
            }
            Command::Simulate(args) | Command::Qini(args) => {
                if let Some(jobs) = args.jobs {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(jobs)
                        .build_global()
                        .map_err(|e| RunnerError::Other(e.to_string()))?;
                }
                let (config, out) = load(args)?;
                let expected = match &cli.command {
                    Command::Simulate(_) => ucmab::config::ExperimentKind::Simulate,
                    _ => ucmab::config::ExperimentKind::Qini,
                };
                if config.kind != expected {
                    return Err(RunnerError::Config(
                        ucmab::config::ConfigError::Invalid(format!(
                            "config kind {:?} does not match the subcommand",
                            config.kind
                        )),
                    ));
                }
                runner::run(&config, &out)?;
                println!("results written to {}", out.display());
                Ok(())
            }
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
