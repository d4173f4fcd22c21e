use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = tagseek::cli::Cli::parse();
    match tagseek::cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
