//! Command-line front end for the experiment runner.
//!
//! Exit codes: 0 success, 1 other module error, 2 config error,
//! 3 assertion failure, 4 cap exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use smp_lab::experiment::{
    error_record, experiment_names, run_to_dir, sweep, ExperimentConfig, ExperimentError, SweepSpec,
};

#[derive(Debug, Parser)]
#[command(name = "smp-lab", about = "Run SMP protocol experiments and write CSV/summary reports")]
struct Cli {
    /// TOML file with the same fields as the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment name.
    #[arg(long)]
    experiment: Option<String>,
    /// Parameter assignment, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for --param trials=N.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override, repeatable.
    #[arg(long = "tolerance", value_name = "KEY=VALUE")]
    tolerances: Vec<String>,
    /// Sweep one parameter over comma-separated values.
    #[arg(long, value_name = "KEY=V1,V2,...")]
    sweep: Option<String>,
    /// Print the experiment names and exit.
    #[arg(long)]
    list: bool,
}

fn build(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = &cli.experiment {
        cfg.experiment = e.clone();
    }
    if cfg.experiment.is_empty() {
        return Err(ExperimentError::Config("no experiment given (use --experiment or --config)".into()));
    }
    for p in &cli.params {
        cfg.set_param(p)?;
    }
    if let Some(t) = cli.trials {
        cfg.params.trials = Some(t);
    }
    for t in &cli.tolerances {
        cfg.set_tolerance(t)?;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if let Some(s) = &cli.sweep {
        cfg.sweep = Some(SweepSpec::parse(s)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        println!("{}", experiment_names().join("\n"));
        return ExitCode::SUCCESS;
    }
    let cfg = match build(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprint!("{}", error_record(&e));
            return ExitCode::from(e.exit_code());
        }
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("smp-lab-out"));
    let result = match &cfg.sweep {
        Some(spec) => sweep(&cfg, spec, &dir),
        None => run_to_dir(&cfg, &dir),
    };
    match result {
        Ok(code) => {
            if let Ok(summary) = std::fs::read_to_string(dir.join("summary.txt")) {
                print!("{summary}");
            } else {
                println!("wrote {}", dir.join("sweep.csv").display());
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprint!("{}", error_record(&e));
            ExitCode::from(e.exit_code())
        }
    }
}
