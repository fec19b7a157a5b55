//! Command-line front end for calabi-core.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use clap::{Parser, Subcommand};
use config::{Overrides, RunConfig};
use std::io::Write;

#[derive(Debug, Parser)]
#[command(name = "calabi", version, about = "Radial Kahler-Einstein profiles, gluing scales and obstruction model")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the profile and write t, u, phi, psi, V
    Solve,
    /// Fit the expansion of the profile against the critical one
    Expand,
    /// Potential, linearization, cone angles and rigidity
    Metric,
    /// Gluing plan at eps = eps_beta (1 + eta)
    Glue,
    /// Balancing function A(eta) and its sign change
    Obstruct(commands::ObstructArgs),
    /// Solve a list of beta values, one directory per point
    Sweep,
    /// Invariant checks with PASS/FAIL/SKIPPED lines
    Verify(verify::VerifyArgs),
    /// Regime and eps_beta law per geometry
    Regimes {
        /// n,alpha,j0 (repeatable); defaults to the projective hypersurface families
        #[arg(long = "row")]
        rows: Vec<String>,
    },
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let cfg = RunConfig::resolve(&cli.overrides)?;
    match &cli.command {
        Command::Solve => commands::solve(&cfg, out),
        Command::Expand => commands::expand(&cfg, out),
        Command::Metric => commands::metric(&cfg, out),
        Command::Glue => commands::glue(&cfg, out),
        Command::Obstruct(a) => commands::obstruct(&cfg, a, out),
        Command::Sweep => commands::sweep(&cfg, out),
        Command::Verify(a) => verify::verify(&cfg, a, out),
        Command::Regimes { rows } => commands::regimes(&cfg, rows, out),
    }
}

/// Parses `args`, runs, and returns the exit code. Errors go to stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { error::EXIT_INPUT } else { error::EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            error::exit_code(&e)
        }
    }
}
