//! Run manifests: what produced an output directory and how.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::io::write_json;

/// File name of the manifest inside an output directory. JSON artifacts
/// carry it in their `manifest` field; the manifest lists every artifact
/// with its digest.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub arguments: BTreeMap<String, String>,
    /// SHA-256 of each input file.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of each artifact written next to the manifest.
    pub outputs: BTreeMap<String, String>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Collects inputs, artifacts and timings while a command runs.
pub struct ManifestBuilder {
    manifest: RunManifest,
    out_dir: PathBuf,
    started: Instant,
    phase: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64, config: BTreeMap<String, String>, out_dir: &Path) -> Self {
        let now = Instant::now();
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                config,
                arguments: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                timings: BTreeMap::new(),
            },
            out_dir: out_dir.to_path_buf(),
            started: now,
            phase: now,
        }
    }

    pub fn argument(&mut self, key: &str, value: impl ToString) {
        self.manifest.arguments.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let digest = sha256_file(path)?;
        self.manifest.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Records the time since the previous phase ended.
    pub fn phase_done(&mut self, name: &str) {
        self.manifest.timings.insert(name.to_string(), self.phase.elapsed().as_secs_f64());
        self.phase = Instant::now();
    }

    /// Path of an artifact inside the output directory.
    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Digests the named artifacts and writes the manifest.
    pub fn finish(mut self, artifacts: &[&str]) -> Result<RunManifest, CliError> {
        for name in artifacts {
            let digest = sha256_file(&self.out_dir.join(name))?;
            self.manifest.outputs.insert(name.to_string(), digest);
        }
        self.manifest.timings.insert("total".into(), self.started.elapsed().as_secs_f64());
        write_json(&self.out_dir.join(MANIFEST_FILE), &self.manifest)?;
        Ok(self.manifest)
    }
}
