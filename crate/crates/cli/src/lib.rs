//! `bozk`: runs the BO-ZK laboratory from a flat manifest and writes CSV
//! tables plus a JSON summary.
//!
//! Exit codes: 0 success, 2 configuration error (nothing written),
//! 3 numerical abort, 4 verification failure.

pub mod commands;
pub mod manifest;
pub mod output;
pub mod pool;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use commands::{Completed, ConfigFailure, EXIT_CONFIG};
use manifest::{Command, RunManifest, DEFAULT_MANIFEST};

#[derive(Debug, Parser)]
#[command(name = "bozk", version, about = "Pseudospectral lab for the BO-ZK equation")]
struct Args {
    /// simulate | linear | picard | uc | verify | diagnose (overrides `command` in the manifest)
    subcommand: Option<String>,
    /// Manifest file; the built-in default manifest is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized data and suites (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn load(args: &Args) -> Result<(Command, RunManifest, PathBuf), ConfigFailure> {
    let (text, base) = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigFailure(format!("{}: {e}", p.display())))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (text, base)
        }
        None => (DEFAULT_MANIFEST.to_string(), PathBuf::from(".")),
    };
    let mut m = RunManifest::from_text(&text, &base).map_err(|e| ConfigFailure(e.0))?;
    if let Some(seed) = args.seed {
        m.seed = seed;
    }
    let command = match &args.subcommand {
        Some(s) => s.parse().map_err(|e: manifest::ManifestError| ConfigFailure(e.0))?,
        None => m.command.ok_or_else(|| ConfigFailure("no subcommand given".into()))?,
    };
    let out = args
        .out
        .clone()
        .or_else(|| m.out.clone())
        .unwrap_or_else(|| PathBuf::from("bozk-out"));
    Ok((command, m, out))
}

fn dispatch(command: Command, m: &RunManifest) -> Result<Completed, ConfigFailure> {
    let threads = pool::thread_cap();
    match command {
        Command::Simulate => commands::simulate(m, false),
        Command::Linear => commands::simulate(m, true),
        Command::Picard => commands::picard(m),
        Command::Uc => commands::uc(m, threads),
        Command::Verify => verify::verify(m, threads),
        Command::Diagnose => commands::diagnose(m),
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = load(&args).and_then(|(command, m, out)| {
        let done = dispatch(command, &m)?;
        done.outputs
            .write_to(&out)
            .map_err(|e| ConfigFailure(format!("writing {}: {e}", out.display())))?;
        Ok((done, out))
    });
    match result {
        Ok((done, out)) => {
            if !args.quiet {
                println!("{} (results in {})", done.message, out.display());
            }
            done.code
        }
        Err(ConfigFailure(msg)) => {
            eprintln!("bozk: configuration error: {msg}");
            EXIT_CONFIG
        }
    }
}
