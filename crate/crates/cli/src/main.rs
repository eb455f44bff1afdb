use std::process::ExitCode;

use clap::Parser;

use ramgate_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ramgate: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
