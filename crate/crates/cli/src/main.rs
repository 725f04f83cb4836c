use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = smdo_cli::Cli::parse();
    match smdo_cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smdo-tune: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
