//! `conical`: regimes, geometry, solves and audits of conical Chaplygin-gas
//! flow past delta wings.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conical_chaplygin::edge_flow::Side;

use config::{CaseConfig, Resolution};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("audit: {0}")]
    Audit(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Audit(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "conical", version, about)]
struct Cli {
    /// Case file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; files are written only when given.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    h: Option<f64>,
    #[arg(long, global = true)]
    eps_min: Option<f64>,
    /// Wedge half-angle in degrees, zero for a flat wing.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    side: Option<Side>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical angles, attachment and downstream states.
    Regimes,
    /// State behind the planar wave for the configured incidence.
    Polar,
    /// Key points of the wave pattern.
    Geometry,
    /// Solve, export and audit the configured case.
    Solve,
    /// Audit a saved field.
    Verify { field: PathBuf },
    /// Write CSV and VTK files for a saved field.
    Export {
        field: PathBuf,
        /// Keep velocities in the wedge-aligned frame.
        #[arg(long)]
        rotated: bool,
    },
}

fn configure(cli: &Cli) -> Result<CaseConfig, CliError> {
    let mut c = CaseConfig::default();
    if let Some(path) = &cli.config {
        c.load(path)?;
    }
    if let Some(h) = cli.h {
        c.resolution = Resolution::Step(h);
    }
    if let Some(e) = cli.eps_min {
        c.eps_min = e;
    }
    if let Some(t) = cli.theta {
        c.theta_deg = t;
    }
    if let Some(s) = cli.side {
        c.side = s;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(o) = &cli.out {
        c.out = o.clone();
    }
    for kv in &cli.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Validation(format!("expected KEY=VALUE, got {kv:?}")))?;
        c.set(k, v)?;
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = configure(cli)?;
    let save = cli.out.is_some();
    match &cli.command {
        Command::Regimes => commands::regimes(&config, save),
        Command::Polar => commands::polar(&config, save),
        Command::Geometry => commands::geometry(&config, save),
        Command::Solve => commands::solve(&config),
        Command::Verify { field } => commands::verify(field, &config, save),
        Command::Export { field, rotated } => commands::export(field, &config, *rotated),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
