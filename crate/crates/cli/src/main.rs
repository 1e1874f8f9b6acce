mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

/// Failure of a command, tagged with its exit code class.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(spectral_topics::Error),
}

impl From<spectral_topics::Error> for CliError {
    fn from(e: spectral_topics::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn class(&self) -> (&'static str, u8) {
        use spectral_topics::ErrorClass;
        match self {
            CliError::Usage(_) => ("usage", 1),
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => ("usage", 1),
                ErrorClass::Io => ("io", 2),
                ErrorClass::Numerical => ("numerical", 3),
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn report(err: &CliError) -> ExitCode {
    let (class, code) = err.class();
    let line = serde_json::json!({ "error": class, "code": code, "message": err.message() });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let summary: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            return report(&CliError::Usage(summary.join(" ").trim_start_matches("error: ").to_string()));
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return report(&CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return report(&CliError::Usage(format!("cannot configure thread pool: {e}")));
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
