use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadcable_sim::run::{resolve_certificate, RunOptions};
use quadcable_sim::{epsilon_sweep, resolve_scenario, run_scenario, scenarios, SimResult};

/// Cooperative cable-suspended load transport with four quadrotors.
#[derive(Parser)]
#[command(name = "quadcable", version)]
struct Cli {
    /// Root for relative output directories (overrides $QUADCABLE_OUTPUT_ROOT).
    #[arg(long, global = true)]
    output_root: Option<PathBuf>,
    /// Do not write any files.
    #[arg(long, global = true)]
    no_files: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or built-in scenario.
    Run { config: String },
    /// Compare the elastic and inelastic models over a list of eps.
    Sweep {
        config: String,
        /// Comma-separated eps values (default: the scenario's list).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Print the stability certificate of a scenario.
    Certify { config: String },
    /// List the built-in scenarios.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { output_root: cli.output_root.clone(), no_files: cli.no_files };
    match dispatch(cli.command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command, opts: &RunOptions) -> SimResult<()> {
    match cmd {
        Command::Run { config } => {
            let cfg = resolve_scenario(&config)?;
            let report = run_scenario(&cfg, opts)?;
            println!("{report}");
        }
        Command::Sweep { config, eps } => {
            let cfg = resolve_scenario(&config)?;
            let report = epsilon_sweep(&cfg, eps.as_deref(), opts)?;
            println!("{report}");
        }
        Command::Certify { config } => {
            let cfg = resolve_scenario(&config)?;
            let report = resolve_certificate(&cfg)?;
            println!("{report}");
        }
        Command::ListScenarios => {
            for name in scenarios::NAMES {
                println!("{name:<16} {}", scenarios::describe(name));
            }
        }
    }
    Ok(())
}
