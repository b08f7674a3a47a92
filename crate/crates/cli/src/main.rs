//! `dyad`: calibrate testbeds and run the trial experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use output::{commit, manifest_path, Outputs, RunInfo};

#[derive(Parser)]
#[command(name = "dyad", version, about = "Dyadic adherence simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bisect the treatment scale to each STE target and write the populations.
    Calibrate(Common),
    /// Learning curves of the configured algorithms against uniform random.
    Run(Common),
    /// Learning curves on every configured testbed variant.
    Ablate(Common),
    /// Intervention rates of single trained components and the fixed-probability sweep.
    Collaborate(Common),
    /// Write the synthetic base population.
    ExportPopulation(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Calibrate(_) => "calibrate",
            Command::Run(_) => "run",
            Command::Ablate(_) => "ablate",
            Command::Collaborate(_) => "collaborate",
            Command::ExportPopulation(_) => "export-population",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Calibrate(c) | Command::Run(c) | Command::Ablate(c) | Command::Collaborate(c) | Command::ExportPopulation(c) => c,
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if absent.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the master seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the run count (replicates for `collaborate`).
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads for run-level parallelism.
    #[arg(long, env = "DYAD_JOBS")]
    jobs: Option<usize>,
    /// Overwrite an existing run manifest.
    #[arg(long)]
    force: bool,
}

/// Exit statuses. Usage errors exit with clap's status 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Failure {
    Runtime = 1,
    Config = 3,
    Calibration = 4,
    OutputExists = 5,
    Io = 6,
}

struct Fatal(Failure, String);

impl From<dyad_core::Error> for Fatal {
    fn from(e: dyad_core::Error) -> Self {
        use dyad_core::Error::*;
        let kind = match e {
            Config(_) => Failure::Config,
            Calibration(_) | UndefinedSte(_) => Failure::Calibration,
            Io(_) => Failure::Io,
            _ => Failure::Runtime,
        };
        Fatal(kind, e.to_string())
    }
}

fn execute(command: &Command) -> Result<(), Fatal> {
    let common = command.common();
    let bytes = std::fs::read(&common.config)
        .map_err(|e| Fatal(Failure::Config, format!("cannot read config {}: {e}", common.config.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Fatal(Failure::Config, "config is not UTF-8".into()))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| Fatal(Failure::Config, format!("invalid config: {e}")))?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.runs {
        match command {
            Command::Collaborate(_) => cfg.collaboration.replicates = r,
            _ => cfg.trial.n_runs = r,
        }
    }
    if manifest_path(&common.out).exists() && !common.force {
        return Err(Fatal(
            Failure::OutputExists,
            format!("{} already holds a run manifest; pass --force to overwrite", common.out.display()),
        ));
    }
    if let Some(j) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Fatal(Failure::Runtime, format!("cannot start worker pool: {e}")))?;
    }
    let outputs: Outputs = match command {
        Command::Calibrate(_) => commands::calibrate(&cfg)?,
        Command::Run(_) => commands::run(&cfg)?,
        Command::Ablate(_) => commands::ablate(&cfg)?,
        Command::Collaborate(_) => commands::collaborate(&cfg)?,
        Command::ExportPopulation(_) => commands::export_population(&cfg)?,
    };
    let resolved = toml::to_string(&cfg).map_err(|e| Fatal(Failure::Runtime, e.to_string()))?;
    let info = RunInfo { subcommand: command.name(), config_path: &common.config, config_bytes: &bytes, resolved_config: &resolved, seed: cfg.seed };
    commit(&common.out, &outputs, &info).map_err(|e| Fatal(Failure::Io, format!("cannot write {}: {e}", common.out.display())))?;
    log::info!("{} artifacts written to {}", outputs.artifacts.len(), common.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fatal(kind, msg)) => {
            eprintln!("dyad {}: {msg}", cli.command.name());
            ExitCode::from(kind as u8)
        }
    }
}
