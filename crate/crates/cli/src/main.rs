//! `wva`: regime checks, single runs, parameter sweeps and detector Monte Carlo.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Common, DetectArgs};

#[derive(Parser)]
#[command(
    name = "wva",
    version,
    about = "Weak-value amplification of a cavity vacuum kick"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report every regime ratio with its pass/warn/fail status.
    Validate(Common),
    /// One propagation, post-selection and shift measurement.
    Run(Common),
    /// Repeat `run` over the `[sweep]` parameter grid.
    Sweep(Common),
    /// Monte Carlo of the two-detector ratio signal.
    Detect(DetectArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(c) => commands::validate(c),
        Command::Run(c) => commands::run_cmd(c),
        Command::Sweep(c) => commands::sweep(c),
        Command::Detect(a) => commands::detect(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
