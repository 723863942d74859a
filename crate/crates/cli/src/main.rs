//! Command-line front end: run scenarios, validate configs, sweep gains.
//!
//! Subcommands:
//! - `run <config>`: simulate and write trajectory CSV, column map, and a
//!   JSON + text report into `--output`.
//! - `check <config>`: parse, validate, and evaluate the certified-start
//!   conditions without simulating.
//! - `sweep <config> --grid kp=...`: run a parameter grid and tabulate
//!   time-to-consensus and energy-monotonicity violations per cell.

mod config;
mod report;
mod sweep;

use attitude_consensus::scenario::{Scenario, ScenarioError};
use attitude_consensus::sim::{check_initial_set, run_scenario, SimError};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (bad flag syntax, empty or malformed sweep grid)
  3  file error (config not readable, output not writable)
  4  config does not parse (TOML syntax or unknown fields)
  5  config fails validation (graph, gains, agents, reference)
  6  simulation diverged (non-finite state)";

#[derive(Parser)]
#[command(
    name = "attitude-consensus",
    version,
    about = "Multi-agent rigid-body attitude consensus and tracking simulator",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trajectory + report files.
    Run(RunArgs),
    /// Validate a scenario and report the certified-start margins.
    Check(CheckArgs),
    /// Run a grid of gain/step variations of one scenario.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    output: PathBuf,
    /// Override a config key, e.g. --set gains.kp=20 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set scenario.step=<h>.
    #[arg(long, value_name = "h")]
    step: Option<f64>,
    /// Shorthand for --set scenario.duration=<s>.
    #[arg(long, value_name = "s")]
    duration: Option<f64>,
}

#[derive(Args)]
struct CheckArgs {
    /// Scenario file (TOML).
    config: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    output: PathBuf,
    /// Grid axis, e.g. --grid kp=1,2,4 (repeatable; kp, kd, or step).
    #[arg(long = "grid", value_name = "PARAM=V1,V2,...")]
    grid: Vec<String>,
    /// Override a config key before the grid is applied (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set scenario.step=<h> (applied before the grid).
    #[arg(long, value_name = "h")]
    step: Option<f64>,
    /// Shorthand for --set scenario.duration=<s>.
    #[arg(long, value_name = "s")]
    duration: Option<f64>,
}

/// All failure modes of the binary, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    File {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(toml::de::Error),
    #[error("{0}")]
    Validation(ScenarioError),
    #[error("{0}")]
    Simulation(SimError),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::File { .. } => 3,
            AppError::Parse(_) => 4,
            AppError::Validation(_) => 5,
            AppError::Simulation(_) => 6,
        }
    }
}

/// TOML syntax/schema problems exit differently from semantic validation.
fn scenario_error(e: ScenarioError) -> AppError {
    match e {
        ScenarioError::Toml(inner) => AppError::Parse(inner),
        other => AppError::Validation(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), AppError> {
    let mut value = config::load_value(&args.config)?;
    for raw in &args.set {
        config::apply_set(&mut value, raw)?;
    }
    if let Some(h) = args.step {
        config::apply_value(&mut value, "scenario.step", toml::Value::Float(h))?;
    }
    if let Some(d) = args.duration {
        config::apply_value(&mut value, "scenario.duration", toml::Value::Float(d))?;
    }
    let effective_config = config::render(&value);
    let scenario = Scenario::from_toml_value(value).map_err(scenario_error)?;

    let initial = check_initial_set(&scenario);
    for v in initial.violations() {
        eprintln!(
            "warning: start outside the certified region: {} = {:.6} exceeds bound {:.6}",
            v.label, v.value, v.bound
        );
    }

    let log = run_scenario(&scenario).map_err(AppError::Simulation)?;
    let report = report::build(
        &scenario,
        &log,
        &initial,
        args.set.clone(),
        effective_config,
        &args.output,
    );
    report::write_outputs(&report, &log, &args.output)?;
    print!("{}", report::human_summary(&report));
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), AppError> {
    let value = config::load_value(&args.config)?;
    let scenario = Scenario::from_toml_value(value).map_err(scenario_error)?;
    let initial = check_initial_set(&scenario);

    println!(
        "{}: {} mode, {} agents, step {} s, duration {} s — configuration valid",
        scenario.name,
        scenario.mode,
        scenario.agent_count(),
        scenario.step,
        scenario.duration
    );
    println!("certified-start conditions (sufficient, not necessary):");
    for c in &initial.checks {
        let verdict = if c.satisfied() { "ok" } else { "OUTSIDE" };
        println!(
            "  {:<40} {:>12.6} <= {:>12.6}  [{verdict}]",
            c.label, c.value, c.bound
        );
    }
    if initial.all_satisfied() {
        println!("all starts inside the certified region");
    } else {
        println!(
            "warning: {} condition(s) outside the certified region; \
             convergence is not guaranteed (the bound is sufficient, not necessary)",
            initial.violations().len()
        );
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), AppError> {
    let mut value = config::load_value(&args.config)?;
    for raw in &args.set {
        config::apply_set(&mut value, raw)?;
    }
    if let Some(h) = args.step {
        config::apply_value(&mut value, "scenario.step", toml::Value::Float(h))?;
    }
    if let Some(d) = args.duration {
        config::apply_value(&mut value, "scenario.duration", toml::Value::Float(d))?;
    }
    let axes = sweep::parse_axes(&args.grid)?;
    sweep::run(&value, &axes, &args.output)
}
