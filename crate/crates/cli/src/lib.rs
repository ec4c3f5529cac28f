//! Command-line front end for `depcens-core`: CSV ingestion, JSON/CSV reports
//! and parallel fan-out of bootstrap and simulation-study work.

pub mod cli;
pub mod commands;
pub mod io;
pub mod parallel;
pub mod report;

use cli::{Cli, Command};

/// Dispatch a parsed command line and return the exit code.
pub fn run(cli: &Cli) -> anyhow::Result<u8> {
    parallel::init_threads(cli.threads)?;
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Study(a) => commands::study(a),
        Command::Density(a) => commands::density(a),
        Command::Probe(a) => commands::probe(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
    }
}
