//! `levinson2d`: phase shifts, bound states, Darboux partners, Levinson
//! audits and cross sections for two-dimensional central potentials.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Overrides;
use crate::config::ExperimentConfig;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 1.
    Numerical(levinson2d_core::Error),
    /// Exit code 1.
    Failed(String),
    /// Exit code 1.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Failed(m) => write!(f, "check failed:\n{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<levinson2d_core::Error> for CliError {
    fn from(e: levinson2d_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "levinson2d", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase shifts on the configured k grid (phase_shifts.csv, channels.csv).
    PhaseShift(Args),
    /// Levinson audit per channel (levinson.csv).
    Levinson(Args),
    /// Bound-state energies per channel (bound_states.csv).
    BoundStates(Args),
    /// Removes the ground state of one channel (partner_potential.csv, darboux.csv).
    Darboux(Args),
    /// Amplitude and cross sections (cross_section_<i>.csv, partial_cross_sections.csv).
    CrossSection(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Levinson tolerance in radians.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Largest |m| in the partial-wave sum.
    #[arg(long)]
    mmax: Option<i32>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (Command::PhaseShift(args)
    | Command::Levinson(args)
    | Command::BoundStates(args)
    | Command::Darboux(args)
    | Command::CrossSection(args)) = &cli.command;
    if let Some(t) = args.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config(format!("--tolerance: must be positive, got {t}")));
        }
    }
    let cfg = ExperimentConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out.display())))?;
    let o = Overrides { tolerance: args.tolerance, m_max: args.mmax };
    match &cli.command {
        Command::PhaseShift(_) => commands::phase_shift(&cfg, &args.out),
        Command::Levinson(_) => commands::levinson(&cfg, &args.out, o),
        Command::BoundStates(_) => commands::bound_states(&cfg, &args.out),
        Command::Darboux(_) => commands::darboux(&cfg, &args.out, o),
        Command::CrossSection(_) => commands::cross_section(&cfg, &args.out, o),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
