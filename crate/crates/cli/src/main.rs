mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::Cli;
use crate::commands::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let name = cli.command.name();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match commands::dispatch(cli.command, &mut out).and_then(|()| out.flush().map_err(Into::into)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    eprintln!("\n{}\n\nFor more information, try '--help'.", sub.render_usage());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
