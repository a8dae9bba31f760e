//! Run manifests: every command that writes an output also records the fully
//! resolved invocation next to it, so a result can always be traced back to
//! the exact inputs and parameters that produced it.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
pub struct RunManifest {
    /// Subcommand name, e.g. "generate"
    pub command: String,
    /// Version of the tool that produced the output
    pub version: String,
    /// Primary RNG seed of the run, when the command takes one
    pub seed: Option<u64>,
    /// Fully resolved arguments, defaults included
    pub config: serde_json::Value,
    /// Input file paths, as given on the command line
    pub inputs: Vec<String>,
    /// Output file paths written by the run
    pub outputs: Vec<String>,
    /// Wall-clock duration of the run
    pub duration_ms: u128,
}

/// Builder that captures the start time up front so `duration_ms` covers the
/// whole command, not just the bookkeeping at the end.
pub struct ManifestTimer {
    command: String,
    started: Instant,
}

impl ManifestTimer {
    pub fn start(command: &str) -> Self {
        ManifestTimer {
            command: command.to_string(),
            started: Instant::now(),
        }
    }

    pub fn finish<C: Serialize>(
        self,
        config: &C,
        seed: Option<u64>,
        inputs: &[&Path],
        outputs: &[&Path],
    ) -> Result<RunManifest, CliError> {
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Data(format!("failed to serialize run config: {e}")))?;
        Ok(RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            duration_ms: self.started.elapsed().as_millis(),
        })
    }
}

/// Manifest path for a single-file output: `<file>.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    name.push_str(".manifest.json");
    output.with_file_name(name)
}

/// Serialize the manifest and write it atomically.
pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let json = serde_json::to_vec_pretty(manifest)
        .map_err(|e| CliError::Data(format!("failed to serialize manifest: {e}")))?;
    write_atomic(path, &json)
}

/// Write `bytes` to `path` through a temp file in the same directory, then
/// rename into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| {
        CliError::Io(format!(
            "failed to create temp file in {}: {e}",
            dir.display()
        ))
    })?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::Io(format!("failed to write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("failed to persist {}: {e}", path.display())))?;
    Ok(())
}
