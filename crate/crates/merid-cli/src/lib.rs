//! Command-line front end: configuration resolution, the five commands and
//! their CSV/JSON outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use commands::{fill_defaults, run, Command};
use config::{resolve, FlagOverrides};
use error::CliResult;
use output::{build_manifest, timestamp, write_all};

/// Resolves the configuration, runs `cmd` and writes outputs plus manifest to `out`.
pub fn execute(
    cmd: Command,
    config_path: Option<&Path>,
    flags: &FlagOverrides,
    out: &Path,
) -> CliResult<(Vec<PathBuf>, Vec<String>)> {
    let text = match config_path {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => None,
    };
    let mut r = resolve(text.as_deref(), flags)?;
    fill_defaults(&mut r, cmd);
    let result = run(cmd, &r)?;
    let manifest = build_manifest(cmd.name(), &r, &result.files, timestamp()?);
    let paths = write_all(out, &result.files, &manifest)?;
    Ok((paths, result.summary))
}

/// Size of the sweep thread pool from MERID_THREADS; `None` keeps rayon's default.
pub fn thread_count() -> CliResult<Option<usize>> {
    match std::env::var("MERID_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(error::usage(format!("MERID_THREADS must be a positive integer, got '{s}'"))),
        },
        Err(_) => Ok(None),
    }
}
