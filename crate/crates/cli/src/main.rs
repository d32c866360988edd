use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod plot;

use config::{FeasibilityArgs, OracleArgs, ShimArgs, SpectrumArgs, SweepArgs};

/// Quench dynamics, spectra and calibration loops for staggered Ising rings.
#[derive(Debug, Parser)]
#[command(name = "mbco", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the anneal time and record K(τ), P(τ)
    Sweep(SweepArgs),
    /// Fourier spectrum of P(τ) with optional shot-noise significance
    Spectrum(SpectrumArgs),
    /// Run the calibration loop against a simulated miscalibrated sampler
    Shim(ShimArgs),
    /// Compare the block solver with exact diagonalization (N <= 12)
    Oracle(OracleArgs),
    /// Check sampling, coherence and temperature conditions
    Feasibility(FeasibilityArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config files or inputs. Exit code 2.
    Config(String),
    /// Integration or sampling failure. Exit code 3.
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<mbco::Error> for CliError {
    fn from(e: mbco::Error) -> Self {
        use mbco::Error::*;
        match e {
            Integration { .. } | NormDrift { .. } | Sampler { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Run record written next to every command's outputs.
#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    resolved_config: &'a C,
    seed: u64,
    version: &'a str,
    started_at: String,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    notes: serde_json::Map<String, serde_json::Value>,
}

pub struct Run {
    started_at: String,
}

impl Run {
    fn start() -> Self {
        Self { started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true) }
    }

    pub fn manifest<C: Serialize>(
        &self,
        out: &Path,
        command: &str,
        config: &C,
        seed: u64,
        notes: serde_json::Map<String, serde_json::Value>,
    ) -> Result<(), CliError> {
        let m = Manifest {
            command,
            resolved_config: config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started_at: self.started_at.clone(),
            notes,
        };
        write_json(&out.join("manifest.json"), &m)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn prepare_out(dir: &Path, threads: usize) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    if threads > 0 {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = Run::start();
    let result = match &cli.command {
        Command::Sweep(a) => commands::sweep(a, &run),
        Command::Spectrum(a) => commands::spectrum(a, &run),
        Command::Shim(a) => commands::shim(a, &run),
        Command::Oracle(a) => commands::oracle(a, &run),
        Command::Feasibility(a) => commands::feasibility(a, &run),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mbco: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
