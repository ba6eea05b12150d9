//! Run manifest: seed, config hash, input hashes and per-stage records.
//!
//! Everything in the manifest is deterministic except the per-stage
//! `duration_ms` timings; reproducibility checks compare manifests with the
//! timings zeroed (see [`Manifest::with_zeroed_durations`]).

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Settings;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageRecord {
    pub name: String,
    pub output: String,
    pub sha256: String,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub run_id: String,
    pub seed: u64,
    pub config_hash: String,
    pub inputs: Vec<InputRecord>,
    pub stages: Vec<StageRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot hash {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Hash the resolved scalar settings (canonical JSON), so flag overrides are
/// reflected in the hash even though they never touch the config file.
pub fn config_hash(settings: &Settings) -> Result<String> {
    let canonical = serde_json::to_string(settings).context("cannot serialize settings")?;
    Ok(sha256_hex(canonical.as_bytes()))
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).context("cannot serialize manifest")?;
        text.push('\n');
        Ok(text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("cannot parse manifest")
    }

    /// Copy with `duration_ms` zeroed on every stage — the deterministic
    /// part of the manifest.
    pub fn with_zeroed_durations(&self) -> Self {
        let mut copy = self.clone();
        for stage in &mut copy.stages {
            stage.duration_ms = 0;
        }
        copy
    }
}
