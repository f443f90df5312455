//! Config-driven command-line front end for `groupoid_flow`.
//!
//! Exit codes: 0 success, 1 output error, 2 config error, 3 numerical
//! failure, 4 undecided (extraction not stabilized or classification
//! inconclusive).

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{build_lagrangian, dispatch, AnyField, Outcome, Status};
pub use config::{parse_config, Kind, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "groupoid-flow", version, about = "Discrete dynamics on groupoids from TOML configs")]
pub struct Cli {
    /// What to run; must match the config's `kind`.
    #[arg(value_enum)]
    pub command: Kind,
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path; overrides the config's `output`. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized searches.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides `tolerances.newton_tol`.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Load, validate and run; nothing is written here.
pub fn execute(cli: &Cli) -> Result<(Option<PathBuf>, Outcome), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = parse_config(&text, cli.command)?;
    if let Some(t) = cli.tol {
        cfg.tolerances.newton_tol = t;
        cfg.tolerances.validate()?;
    }
    let outcome = dispatch(&cfg, cli.seed)?;
    Ok((cli.out.clone().or(cfg.output), outcome))
}

/// Run and write results; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (path, outcome) = match execute(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &path {
        Some(p) => std::fs::write(p, &outcome.csv),
        None => std::io::stdout().write_all(outcome.csv.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {}", CliError::Io(e));
        return 1;
    }
    if let Some(report) = &outcome.report {
        if path.is_some() {
            print!("{report}");
        } else {
            eprint!("{report}");
        }
    }
    match outcome.status {
        Status::Success => 0,
        Status::Undecided(msg) => {
            eprintln!("undecided: {msg}");
            4
        }
        Status::Failed(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
