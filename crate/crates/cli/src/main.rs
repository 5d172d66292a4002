use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dsqc_core::harness::{emit_report, preset, replay, run_scenario, ScenarioConfig, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "dsqc",
    version,
    about = "Deterministic secure quantum communication simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run(RunArgs),
    /// Re-run the scenario stored in a report and compare.
    Replay {
        #[arg(long)]
        report: PathBuf,
    },
    /// Built-in scenarios.
    Presets {
        #[command(subcommand)]
        command: PresetsCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Report path. The transcript log is written beside it. Without this
    /// the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PresetsCommand {
    List,
    /// Print a preset as a scenario file.
    Show {
        name: String,
    },
}

fn load(args: &RunArgs) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(name)) => match preset(name) {
            Some(cfg) => cfg,
            None => bail!("unknown preset {name:?}; try `dsqc presets list`"),
        },
        (None, None) => unreachable!("clap requires one of --config or --preset"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let cfg = load(&args)?;
    let outcome = run_scenario(&cfg)?;
    match &args.out {
        Some(path) => {
            let log = emit_report(&outcome, path)?;
            let a = &outcome.summary.aggregates;
            println!(
                "{}: {} trials, abort fraction {:.4}, detection rate {:.4}, decode accuracy {:.4}",
                cfg.name, a.trials, a.abort_fraction, a.detection_rate, a.decode_accuracy
            );
            println!("report: {}", path.display());
            println!("transcripts: {}", log.display());
        }
        None => print!("{}", outcome.summary.to_toml()),
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Replay { report } => {
            let r = replay(&report)?;
            if r.identical {
                println!("identical: {}", report.display());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("mismatch: {}", report.display());
                for key in &r.differing {
                    println!("  aggregates.{key}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Presets { command } => {
            match command {
                PresetsCommand::List => {
                    for name in PRESET_NAMES {
                        println!("{name}");
                    }
                }
                PresetsCommand::Show { name } => match preset(&name) {
                    Some(cfg) => print!("{}", cfg.to_toml()),
                    None => bail!("unknown preset {name:?}"),
                },
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
