//! `maskridge`: predictions, simulations and comparisons for masked ridge
//! regression, driven by a JSON configuration.
//!
//! Exit status is 0 on success, 2 for configuration or output-directory
//! problems, and 3 when a computation fails numerically. Partial numeric
//! failures still write their artifacts before exiting with 3.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use maskridge::experiment::{configure_threads, CSV_SCHEMA_VERSION};
use serde::Serialize;
use sha2::{Digest, Sha256};

use commands::{Command, RunOutput, CLI_CSV_SCHEMA_VERSION};
use config::{CliConfig, Format};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "maskridge", version, about = "Masked ridge regression: predictions and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; every section is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format, overriding `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Master seed, overriding `experiment.master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    library_version: &'a str,
    csv_schema_version: u32,
    report_csv_schema_version: u32,
    config_sha256: String,
    config: &'a CliConfig,
    seeds: &'a [u64],
    artifacts: Vec<&'a str>,
    warnings: &'a [String],
    status: &'a str,
    wall_clock_seconds: f64,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_outputs(
    command: Command,
    config: &CliConfig,
    output: &RunOutput,
    status: &str,
    elapsed: f64,
) -> Result<(), CliError> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let echoed = config.to_json();
    for a in &output.artifacts {
        write_file(dir, &a.name, &a.contents)?;
    }
    write_file(dir, "config.json", &echoed)?;
    let manifest = Manifest {
        subcommand: command.name(),
        library_version: env!("CARGO_PKG_VERSION"),
        csv_schema_version: CLI_CSV_SCHEMA_VERSION,
        report_csv_schema_version: CSV_SCHEMA_VERSION,
        config_sha256: Sha256::digest(echoed.as_bytes()).iter().map(|b| format!("{b:02x}")).collect(),
        config,
        seeds: &output.seeds,
        artifacts: output.artifacts.iter().map(|a| a.name.as_str()).collect(),
        warnings: &output.warnings,
        status,
        wall_clock_seconds: elapsed,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    write_file(dir, "manifest.json", &text)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let start = Instant::now();
    let mut config = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if let Some(out) = cli.out {
        config.output.dir = out;
    }
    if let Some(format) = cli.format {
        config.output.format = format;
    }
    if let Some(seed) = cli.seed {
        config.experiment.master_seed = seed;
    }
    configure_threads(cli.threads);
    let output = commands::execute(cli.command, &config)?;
    let status = if output.partial_failure { "partial_failure" } else { "ok" };
    write_outputs(cli.command, &config, &output, status, start.elapsed().as_secs_f64())?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    if output.partial_failure {
        eprintln!("some computations failed; see {}", config.output.dir.join("manifest.json").display());
        return Ok(3);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
