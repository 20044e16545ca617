//! `focusfuse` command-line front end.
//!
//! Exit codes: 0 success, 1 bad arguments or input documents, 2 I/O failure,
//! 3 validation failure.

mod args;
mod commands;

use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use serde::Deserialize;

use args::{Cli, Command};

pub const EXIT_ARGUMENT: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

/// A failed run: the message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn argument(message: impl Into<String>) -> Self {
        Self { code: EXIT_ARGUMENT, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VALIDATION, message: message.into() }
    }
}

impl From<focusfuse::Error> for Failure {
    fn from(e: focusfuse::Error) -> Self {
        let code = match e.kind() {
            focusfuse::ErrorKind::Argument => EXIT_ARGUMENT,
            focusfuse::ErrorKind::Io => EXIT_IO,
            focusfuse::ErrorKind::Validation => EXIT_VALIDATION,
        };
        Self { code, message: e.to_string() }
    }
}

/// Optional `--config` file. Only the global settings live here.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    verbose: Option<u8>,
}

fn load_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::argument(format!("{}: {e}", path.display())))
}

/// Settings shared by every subcommand after merging flags over the config file.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: u64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    let verbose = if cli.verbose > 0 { cli.verbose } else { file.verbose.unwrap_or(0) };
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(Failure::argument("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::argument(format!("thread pool: {e}")))?;
    }
    let globals = Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
    };
    log::debug!("seed {} threads {}", globals.seed, rayon::current_num_threads());

    match cli.command {
        Command::Simulate(a) => commands::simulate(&a, globals),
        Command::GenDataset(a) => commands::gen_dataset(&a, globals),
        Command::Fuse(a) => commands::fuse(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::GradCheck(a) => commands::grad_check(&a, globals),
        Command::Validate(a) => commands::validate(&a),
        Command::MakeAssets(a) => commands::make_assets(&a, globals),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_ARGUMENT),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
