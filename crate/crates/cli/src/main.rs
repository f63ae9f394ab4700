mod args;
mod commands;
mod config;
mod error;
mod manifest;

use std::panic;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Ctx;
use config::Settings;
use error::CliError;

fn run(cli: Cli) -> error::Result<()> {
    let ctx = Ctx {
        settings: Settings::load(cli.config.as_deref())?,
        manifest_path: cli.manifest,
    };
    match &cli.command {
        Command::Synth(a) => commands::synth(a, ctx),
        Command::AddNoise(a) => commands::add_noise(a, ctx),
        Command::Mix(a) => commands::mix(a, ctx),
        Command::Filter(a) => commands::filter(a, ctx),
        Command::Eval(a) => commands::eval(a, ctx),
        Command::Sweep(a) => commands::sweep(a, ctx),
        Command::Pipeline(a) => commands::pipeline(a, ctx),
        Command::Bench(a) => commands::bench(a, ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(CliError::Config(String::new()).exit_code());
        }
    };
    // a panic is a broken invariant, not a user error
    let result = panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|_| Err(CliError::Internal("unexpected panic".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evfilt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
