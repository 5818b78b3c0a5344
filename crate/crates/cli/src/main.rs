use std::process::ExitCode;

use clap::Parser;
use rescon_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            // messages already embed their causes
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
