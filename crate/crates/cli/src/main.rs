// SPDX-License-Identifier: Apache-2.0

//! `tfground`: constants, ground-state solves, Riesz potentials, verification
//! and parameter sweeps from the command line.
//!
//! Exit codes: 0 ok, 1 verification failed or internal error, 2 bad
//! configuration or inadmissible parameters, 3 not converged, 4 degenerate
//! state.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::Overrides;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "tfground", version, about = "Radial Thomas-Fermi ground states")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print every named constant of (N, α, p, q).
    Constants {
        #[arg(long)]
        json: bool,
    },
    /// Solve for the ground state; writes profile, report and history.
    Solve,
    /// Riesz potential of a radial density profile, as `r,potential`.
    Potential {
        /// Density profile CSV (`r,u`).
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
    },
    /// Run the invariant suite on a report or a profile.
    Verify {
        #[arg(long, value_name = "FILE", conflicts_with = "profile", required_unless_present = "profile")]
        report: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        profile: Option<PathBuf>,
    },
    /// Ground states over an α grid or an ε grid.
    Sweep {
        /// Comma-separated α values.
        #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
        alphas: Option<Vec<f64>>,
        /// Comma-separated ε values (`inf` allowed in regime (i)).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::RunConfig::resolve(&cli.overrides).and_then(|cfg| match cli.command {
        Command::Constants { json } => commands::constants(&cfg, json),
        Command::Solve => commands::solve(&cfg),
        Command::Potential { profile } => commands::potential(&cfg, &profile),
        Command::Verify { report, profile } => commands::verify(&cfg, report.as_deref(), profile.as_deref()),
        Command::Sweep { alphas, eps } => commands::sweep(&cfg, alphas, eps),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
