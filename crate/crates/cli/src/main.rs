use std::process::ExitCode;

use clap::Parser;
use depcens::cli::Cli;
use depcens::commands::EXIT_ERROR;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match depcens::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
