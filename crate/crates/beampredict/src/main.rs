use std::process::ExitCode;

use beampredict::cli::{self, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = e.record(command);
            match serde_json::to_string(&record) {
                Ok(line) => eprintln!("{line}"),
                Err(_) => eprintln!("error: {e}"),
            }
            ExitCode::FAILURE
        }
    }
}
