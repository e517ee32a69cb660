//! `strip-vortex`: coefficient reports, spectra, branch continuation, the
//! bifurcation function and the acceptance suite from one versioned config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod svg;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use commands::{Context, Status};
use config::{Config, Overrides};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "strip-vortex", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    nx: Option<usize>,
    #[arg(long, global = true)]
    half_length: Option<f64>,
    /// Number of cosine sectors K.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expansion coefficients, bound checks and the convergence table.
    Coefficients,
    /// Lowest T_k eigenvalues and the soliton Morse index over a width scan.
    Spectrum,
    /// Continue the branch bifurcating from d_k.
    Branch,
    /// J(d, lambda) surface and derivative checks at d_k.
    Lyapunov,
    /// Run the acceptance criteria.
    Verify {
        /// Comma-separated criterion ids; overrides the config list.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
    /// Print the resolved configuration as TOML.
    Config,
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let overrides = Overrides { nx: cli.nx, half_length: cli.half_length, modes: cli.modes, tol: cli.tol };
    let mut config = Config::resolve(cli.config.as_deref(), overrides)?;
    if let Command::Verify { criteria } = &cli.command {
        if !criteria.is_empty() {
            config.verify.criteria = criteria.clone();
            config.validate()?;
        }
    }
    let ctx = Context { config, out: cli.out };
    match cli.command {
        Command::Coefficients => commands::coefficients::run(&ctx),
        Command::Spectrum => commands::spectrum::run(&ctx),
        Command::Branch => commands::branch::run(&ctx),
        Command::Lyapunov => commands::lyapunov::run(&ctx),
        Command::Verify { .. } => commands::verify::run(&ctx),
        Command::Config => {
            print!("{}", ctx.config.to_toml());
            Ok(Status::Success)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::CriterionFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("strip-vortex: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
