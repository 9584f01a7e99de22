//! `btgn`: evaluate, fit, compare and sample body-tail generalized normal
//! models from the command line.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Incomplete(msg)) => {
            eprintln!("btgn: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("btgn: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
