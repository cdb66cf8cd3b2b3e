//! Atomic output files and the run manifest.
//!
//! Every artifact is written to a temporary file in the target directory
//! and renamed into place, so a crash never leaves a half-written file
//! under a final name. Each run ends with a manifest.json echoing the
//! fully resolved configuration, the effective seed, package versions and
//! wall time: enough to re-run the command exactly.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::CliError;

/// Resolves the output directory, prefixing relative paths with
/// `$HAZODE_OUTPUT_ROOT` when that variable is set, and creates it.
pub fn resolve_out_dir(out: &Path) -> Result<PathBuf, CliError> {
    let resolved = match std::env::var_os("HAZODE_OUTPUT_ROOT") {
        Some(root) if out.is_relative() => PathBuf::from(root).join(out),
        _ => out.to_path_buf(),
    };
    std::fs::create_dir_all(&resolved)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", resolved.display())))?;
    Ok(resolved)
}

/// Writes `contents` to `dir/name` via a temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::data(format!("cannot create temp file in {}: {e}", dir.display())))?;
    std::fs::write(tmp.path(), contents)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(&path)
        .map_err(|e| CliError::data(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(path)
}

/// Runs `write` against a temporary path, then renames to `dir/name`.
/// Used for artifacts the core library writes itself.
pub fn write_atomic_with(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&Path) -> hazode::Result<()>,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::data(format!("cannot create temp file in {}: {e}", dir.display())))?;
    write(tmp.path())?;
    tmp.persist(&path)
        .map_err(|e| CliError::data(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(path)
}

#[derive(serde::Serialize)]
struct Manifest<'a> {
    command: &'a str,
    /// Fully resolved configuration; feeding this object back through
    /// `--config` reproduces the run.
    config: serde_json::Value,
    /// Effective RNG seed; null for deterministic commands.
    seed: Option<u64>,
    /// Quantities computed during the run (realized censoring rate,
    /// excluded draws); informational, not part of the re-run config.
    #[serde(skip_serializing_if = "Option::is_none")]
    derived: Option<serde_json::Value>,
    versions: Versions,
    wall_time_seconds: f64,
}

#[derive(serde::Serialize)]
struct Versions {
    hazode: &'static str,
    #[serde(rename = "hazode-cli")]
    cli: &'static str,
}

/// Writes manifest.json as the final artifact of a successful run.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: serde_json::Value,
    seed: Option<u64>,
    derived: Option<serde_json::Value>,
    started: Instant,
) -> Result<(), CliError> {
    let manifest = Manifest {
        command,
        config,
        seed,
        derived,
        versions: Versions {
            hazode: hazode::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(dir, "manifest.json", &text)?;
    Ok(())
}

/// Draws a seed from the OS when none was given, so the manifest can
/// record a value that reproduces the run.
pub fn effective_seed(requested: Option<u64>) -> Result<u64, CliError> {
    use rand::TryRngCore;
    match requested {
        Some(s) => Ok(s),
        None => rand::rngs::OsRng
            .try_next_u64()
            .map_err(|e| CliError::data(format!("OS RNG unavailable: {e}"))),
    }
}
