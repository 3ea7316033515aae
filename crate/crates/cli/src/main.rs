use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sme_cli::{execute, CliError, CliLayers, Command, Invocation};

#[derive(Parser)]
#[command(name = "sme", version, about = "Conditioned dynamics of a measured, trapped nanosphere")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// JSON scenario file with flat, unit-suffixed keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one key, e.g. --set k_over_omega=0.01 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Multiply the trajectory count, for quick runs.
    #[arg(long, global = true)]
    scale: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Ensemble time series (timeseries, switchoff, model_ii).
    Run,
    /// Radius or step-size sweep (radius_sweep, accuracy_sweep).
    Sweep,
    /// Per-step timings of every integrator.
    Bench,
    /// Deterministic master-equation solution of the scenario.
    Reference,
    /// Closed-form checks of the numerics.
    Selftest,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Run => Command::Run,
        Cmd::Sweep => Command::Sweep,
        Cmd::Bench => Command::Bench,
        Cmd::Reference => Command::Reference,
        Cmd::Selftest => Command::Selftest,
    };
    let inv = Invocation {
        command,
        config: args.config,
        layers: CliLayers {
            sets: args.sets,
            seed: args.seed,
            workers: args.workers,
            scale: args.scale,
        },
        out: args.out,
    };
    match execute(&inv) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Selftest { report, .. } = &e {
                for line in report {
                    println!("{line}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
