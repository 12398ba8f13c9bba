mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

/// Why a run stopped: bad input (exit 1) or a verifier finding a broken
/// invariant (exit 2).
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Invariant(String),
}

impl From<goodlambda::Error> for Failure {
    fn from(e: goodlambda::Error) -> Self {
        use goodlambda::Error as E;
        match e {
            E::OverlapViolated { .. } | E::OracleInconsistent(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Input("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
    pool.install(|| {
        let outcome = commands::execute(&cli.command)?;
        let text = commands::render(&cli.command, &outcome, cli.format)?;
        output::emit(cli.output.as_deref(), &text)?;
        for (path, content) in &outcome.extra_files {
            output::emit(Some(path), content)?;
        }
        match outcome.violation {
            Some(msg) => Err(Failure::Invariant(msg)),
            None => Ok(()),
        }
    })
}
