use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match disco_cli::run(disco_cli::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
