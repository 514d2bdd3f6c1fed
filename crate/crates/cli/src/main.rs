use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fiberspec_core::cli_reporting::{parse_config, run_command, Command, RunConfig};
use fiberspec_core::Error;
use log::error;

/// Spectra of a high-contrast fiber-reinforced cylinder.
#[derive(Debug, Parser)]
#[command(name = "fiberspec", version)]
struct Cli {
    /// One of: mesh, limit-spectrum, eps-spectrum, converge, validate
    command: String,

    /// JSON run configuration; defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, overrides `output_dir` from the config
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: available cores)
    #[arg(long)]
    threads: Option<usize>,
}

const USAGE: &str = "usage: fiberspec <mesh|limit-spectrum|eps-spectrum|converge|validate> [--config <path>] [--out <dir>] [--threads <n>]";

fn report_error(e: &Error) {
    let record = serde_json::json!({"error": e.kind(), "message": e.to_string()});
    eprintln!("{record}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let command: Command = match cli.command.parse() {
        Ok(c) => c,
        Err(_) => {
            eprintln!("unknown command `{}`\n{USAGE}", cli.command);
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("--threads must be at least 1\n{USAGE}");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("thread pool: {e}");
        }
    }

    let config = match &cli.config {
        Some(path) => parse_config(path),
        None => Ok(RunConfig::default()),
    };
    let mut config = match config {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return ExitCode::from(1);
        }
    };
    if let Some(out) = cli.out {
        config.output_dir = out;
    }

    match run_command(command, &config) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string(&outcome).expect("outcome serializes"));
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            report_error(&e);
            ExitCode::from(1)
        }
    }
}
