use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twedge::config::{Command, Overrides, RunConfig};
use twedge::error::CliError;

/// Tracy-Widom edge distributions: tables, densities, Monte Carlo comparisons and self-checks.
#[derive(Parser)]
#[command(name = "twedge", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write F_beta(s, m) and f_beta(s, m) tables.
    Tabulate(Overrides),
    /// Write plot-ready density grids.
    Density(Overrides),
    /// Draw a batch of rescaled top eigenvalues.
    Sample(Overrides),
    /// Percentile comparison of a batch against F_beta.
    Compare(Overrides),
    /// Run the numerical self-checks; exit status 1 on any failure.
    Verify(Overrides),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, overrides) = match cli.command {
        Cmd::Tabulate(o) => (Command::Tabulate, o),
        Cmd::Density(o) => (Command::Density, o),
        Cmd::Sample(o) => (Command::Sample, o),
        Cmd::Compare(o) => (Command::Compare, o),
        Cmd::Verify(o) => (Command::Verify, o),
    };
    let config = RunConfig::resolve(command, overrides)?;
    twedge::commands::run(&config)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twedge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
