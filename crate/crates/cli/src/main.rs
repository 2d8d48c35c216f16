use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = aqcast_cli::Cli::parse();
    match aqcast_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
