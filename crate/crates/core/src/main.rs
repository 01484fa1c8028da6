use std::process::ExitCode;

use clap::Parser;
use poolsim::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("poolsim: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
