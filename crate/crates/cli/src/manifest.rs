//! Run manifest: what ran, with which config and seed, producing which
//! files.
//!
//! The manifest is the reproducibility receipt. Rerunning a command with the
//! same effective config and seed must reproduce every listed output
//! byte-for-byte, so the manifest records a SHA-256 per output plus the hash
//! of the effective config (with the output directory excluded). Timestamps
//! are informational and are the only fields expected to differ between
//! identical reruns.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputFile>,
}

/// Accumulates output records during a run and writes the manifest last,
/// atomically (temp file + rename), so a manifest on disk always describes a
/// completed run.
pub struct ManifestBuilder {
    command: String,
    config_sha256: String,
    master_seed: u64,
    started_at: String,
    out_dir: PathBuf,
    outputs: Vec<OutputFile>,
}

impl ManifestBuilder {
    pub fn new(
        command: impl Into<String>,
        config_sha256: impl Into<String>,
        master_seed: u64,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            command: command.into(),
            config_sha256: config_sha256.into(),
            master_seed,
            started_at: now_rfc3339(),
            out_dir: out_dir.into(),
            outputs: Vec::new(),
        }
    }

    /// Writes one output file under the run directory and records its hash.
    pub fn write_output(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    pub fn finish(self) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            tool: "ccfin",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_sha256: self.config_sha256,
            master_seed: self.master_seed,
            started_at: self.started_at,
            finished_at: now_rfc3339(),
            outputs: self.outputs,
        };
        write_atomic(&self.out_dir, &manifest)?;
        Ok(manifest)
    }
}

fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn write_atomic(out_dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Io(e.to_string()))?;
    let tmp = out_dir.join(format!("{MANIFEST_FILE}.tmp"));
    let final_path = out_dir.join(MANIFEST_FILE);
    fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, &final_path).map_err(|e| CliError::io(&final_path, e))?;
    Ok(())
}
