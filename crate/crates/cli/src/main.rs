mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "fsi-robin", version, about = "Robin-Robin splitting experiments for Stokes-elasticity interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the splitting scheme and write the energy ledger
    Stability(RunArgs),
    /// Convergence study against a monolithic reference
    Converge(RunArgs),
    /// Convergence study for lambda = 0.1, 1 and 10
    LambdaSweep(RunArgs),
    /// Explicit Dirichlet-Neumann coupling next to the Robin-Robin scheme
    DnCompare(RunArgs),
    /// Print the config in canonical form
    DumpConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn load(path: &PathBuf) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.display().to_string(),
        source,
    })?;
    RunConfig::parse(&text)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Stability(a) => commands::stability(&load(&a.config)?, &a.out),
        Command::Converge(a) => commands::converge(&load(&a.config)?, &a.out),
        Command::LambdaSweep(a) => commands::lambda_sweep(&load(&a.config)?, &a.out),
        Command::DnCompare(a) => commands::dn_compare_cmd(&load(&a.config)?, &a.out),
        Command::DumpConfig { config } => {
            print!("{}", load(&config)?.dump());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
