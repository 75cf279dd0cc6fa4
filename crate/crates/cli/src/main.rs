use std::io::{self, IsTerminal};
use std::process::ExitCode;

use clap::Parser;
use tsm_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prompt = io::stdin().is_terminal();
    let code = tsm_cli::run(cli, &mut io::stdin().lock(), &mut io::stdout().lock(), &mut io::stderr().lock(), prompt);
    ExitCode::from(code)
}
