//! Command-line front end: configuration layering, scenario presets, sweep
//! execution, and output files.

pub mod config;
pub mod output;
pub mod preset;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{Aggregation, ConfigPatch};
pub use output::{emit_outputs, Format, OutputError, RunManifest};
pub use preset::{RunPlan, Scenario, ScenarioPreset, SweepAxis, SweepParam};
pub use sweep::{run_sweep, SweepError, SweepResult};

use crate::error::ConfigError;

#[derive(Debug, Parser)]
#[command(
    name = "poolsim",
    version,
    about = "Simulate scale-to-zero serverless services with a shared warm pool"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario sweep and write summary, CDF, and manifest files.
    Run(Box<RunArgs>),
    /// Re-run the sweep described by a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    /// Flat JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long = "pool-size", value_name = "N[,N...]", value_delimiter = ',')]
    pub pool_size: Option<Vec<usize>>,
    #[arg(long, value_name = "N[,N...]", value_delimiter = ',')]
    pub services: Option<Vec<usize>>,
    #[arg(long)]
    pub requests: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long = "cold-init", value_name = "SEC")]
    pub cold_init: Option<f64>,
    #[arg(long, value_name = "SEC")]
    pub migration: Option<f64>,
    #[arg(long, value_name = "SEC")]
    pub cooldown: Option<f64>,
    #[arg(long = "service-time", value_name = "SEC")]
    pub service_time: Option<f64>,
    #[arg(long = "pareto-shape", value_name = "A")]
    pub pareto_shape: Option<f64>,
    #[arg(long = "pareto-scale", value_name = "S")]
    pub pareto_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub replenish: Option<Switch>,
    #[arg(long = "replenish-latency", value_name = "SEC")]
    pub replenish_latency: Option<f64>,
    #[arg(long, value_enum)]
    pub aggregation: Option<Aggregation>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write every request record.
    #[arg(long = "dump-records")]
    pub dump_records: bool,
    /// Worker threads for trials (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl RunArgs {
    pub fn flags(&self) -> ConfigPatch {
        ConfigPatch {
            scenario: self.scenario,
            n_services: self.services.clone(),
            requests_per_service: self.requests,
            pareto_shape: self.pareto_shape,
            pareto_scale: self.pareto_scale,
            cold_init_s: self.cold_init,
            migration_s: self.migration,
            service_time_s: self.service_time,
            cooldown_s: self.cooldown,
            pool_size: self.pool_size.clone(),
            replenish: self.replenish.map(|s| s == Switch::On),
            replenish_latency_s: self.replenish_latency,
            max_instances_per_service: None,
            trials: self.trials,
            base_seed: self.seed,
            aggregation: self.aggregation,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Sweep(SweepError::Sim(crate::engine::SimError::Config(_))) => 2,
            CliError::Sweep(_) | CliError::Output(_) => 1,
        }
    }
}

fn validate_jobs(jobs: Option<usize>) -> Result<Option<usize>, ConfigError> {
    match jobs {
        Some(0) => Err(ConfigError::invalid("jobs", "must be >= 1")),
        other => Ok(other),
    }
}

/// Executes one invocation; returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Run(args) => {
            let file = args
                .config
                .as_deref()
                .map(ConfigPatch::from_file)
                .transpose()?;
            let plan = RunPlan::resolve(file.as_ref(), &args.flags())?;
            let jobs = validate_jobs(args.jobs)?;
            let result = run_sweep(&plan, args.dump_records, jobs)?;
            Ok(emit_outputs(&result, args.format, &args.out)?)
        }
        Command::Replay(args) => {
            let manifest = RunManifest::load(&args.manifest)?;
            let plan = RunPlan::from_resolved(manifest.config_patch()?)?;
            let jobs = validate_jobs(args.jobs)?;
            let result = run_sweep(&plan, manifest.dump_records, jobs)?;
            Ok(emit_outputs(&result, manifest.format, &args.out)?)
        }
    }
}
