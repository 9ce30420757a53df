//! `fj`: command-line driver for the Fourier-Jacobi engine.
//!
//! Every command writes one JSON artifact (stdout, or `--out FILE`) and a
//! run manifest (stderr, or `FILE.manifest.json`). Failures print
//! `{"error": {"kind", "message"}}` to stderr and exit with status 1.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = output::init_threads() {
        output::print_error(&e);
        return ExitCode::FAILURE;
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::print_error(&e);
            ExitCode::FAILURE
        }
    }
}
