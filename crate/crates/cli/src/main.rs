use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use duopoly::UserTypeDistribution;

mod commands;
mod scenario;

use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] duopoly::MarketError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Price and capacity competition between two network operators.
#[derive(Debug, Parser)]
#[command(name = "duopoly", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sequential best-response price dynamics at fixed capacities.
    Dynamics {
        #[command(flatten)]
        common: Common,
        /// Cap the number of price changes and play the last two by backward induction.
        #[arg(long)]
        regulated: bool,
    },
    /// Capacity/price equilibrium over a grid of unit capacity costs.
    Equilibrium {
        #[command(flatten)]
        common: Common,
    },
    /// User welfare and regulator revenue over a grid of capacity taxes.
    SweepTax {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// User type distribution, overriding the scenario file.
    #[arg(long, value_parser = ["uniform", "f1", "f2", "f3"])]
    distribution: Option<String>,
}

impl Common {
    fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Scenario::parse(&text)?
            }
            None => Scenario::default(),
        };
        if let Some(name) = &self.distribution {
            let dist: UserTypeDistribution = name.parse().map_err(|e: duopoly::MarketError| CliError::Config(e.to_string()))?;
            s = s.with_distribution(dist);
        }
        Ok(s)
    }
}

fn emit(csv: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, csv).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut warn = |msg: String| eprintln!("warning: {msg}");
    let (csv, common) = match &cli.command {
        Command::Dynamics { common, regulated } => {
            let mut s = common.scenario()?;
            s.regulated |= *regulated;
            (commands::dynamics(&s, &mut warn)?, common)
        }
        Command::Equilibrium { common } => (commands::equilibrium(&common.scenario()?)?, common),
        Command::SweepTax { common } => (commands::sweep(&common.scenario()?)?, common),
    };
    emit(&csv, common.output.as_deref())
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
