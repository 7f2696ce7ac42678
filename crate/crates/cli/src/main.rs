//! `lamp` command-line tool.
//!
//! Every subcommand writes its JSON outputs plus a `manifest.<command>.json`
//! into `--out-dir`, prints one summary line and exits with 0 (ok),
//! 1 (usage), 2 (data) or 3 (numeric).

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lamp::{ErrorClass, LampError};

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lamp(LampError),
}

impl From<LampError> for CliError {
    fn from(e: LampError) -> Self {
        CliError::Lamp(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Lamp(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lamp(e) => match e.class() {
                ErrorClass::Data => 2,
                ErrorClass::Numeric => 3,
            },
        }
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    match cli.command {
        Command::Preprocess(a) => commands::preprocess(a, cli.threads),
        Command::Train(a) => commands::train(a, cli.threads),
        Command::Evaluate(a) => commands::evaluate(a, cli.threads),
        Command::Generate(a) => commands::generate(a, cli.threads),
        Command::Analyze(a) => commands::analyze(a, cli.threads),
        Command::Baseline(a) => commands::baseline(a, cli.threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
