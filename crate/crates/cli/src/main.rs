//! `isodelta`: data and verification front end for the isospectral
//! delta family.
//!
//! Exit codes: 0 success, 1 a verification invariant failed (or a runtime
//! failure), 2 invalid configuration or a forbidden family parameter.

mod commands;
mod config;
mod table;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{RunArgs, RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "isodelta",
    version,
    about = "Strictly isospectral Darboux family of the attractive delta potential"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Family tails, one column per C
    Family(RunArgs),
    /// Isospectral ground states, one column per C
    Wavefunction(RunArgs),
    /// Spectral and closed-form verification report (JSON)
    Verify(RunArgs),
    /// Transmission and reflection per C and k
    Scatter(RunArgs),
    /// Poles of the family members
    Singularities(RunArgs),
    /// All four figure datasets into a directory (--out, default `figures`)
    Figures(RunArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<isodelta::Error>() {
        Some(
            isodelta::Error::InvalidGrid(_)
            | isodelta::Error::NotAttractive(_)
            | isodelta::Error::NoOriginNode
            | isodelta::Error::ForbiddenParameter { .. }
            | isodelta::Error::SingularFamilyMember { .. }
            | isodelta::Error::Singular(_)
            | isodelta::Error::NonConvergent { .. }
            | isodelta::Error::InvalidArgument(_),
        ) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (Command::Family(args)
    | Command::Wavefunction(args)
    | Command::Verify(args)
    | Command::Scatter(args)
    | Command::Singularities(args)
    | Command::Figures(args)) = &cli.command;
    let cfg = RunConfig::resolve(args)?;
    match cli.command {
        Command::Family(_) => commands::cmd_family(&cfg)?,
        Command::Wavefunction(_) => commands::cmd_wavefunction(&cfg)?,
        Command::Verify(_) => return verify::cmd_verify(&cfg),
        Command::Scatter(_) => commands::cmd_scatter(&cfg)?,
        Command::Singularities(_) => commands::cmd_singularities(&cfg)?,
        Command::Figures(_) => commands::cmd_figures(&cfg)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
