use std::process::ExitCode;

use arcsep_cli::{exit_code, run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arcsep: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
