//! Deterministic report writing. Every output is byte-stable for a fixed
//! config; the manifest's `timestamp` field is the single exception and sits
//! on its own line.

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    /// Wall-clock provenance only; the one nondeterministic byte region.
    pub timestamp: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value).context("serializing report")?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_text(text: &str, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes `manifest.json` listing the run's outputs (sorted) and config hash.
pub fn write_manifest(
    command: &str,
    config_bytes: &[u8],
    seed: u64,
    mut outputs: Vec<String>,
    out_dir: &Path,
) -> anyhow::Result<()> {
    outputs.sort();
    let manifest = Manifest {
        command: command.to_string(),
        config_hash: sha256_hex(config_bytes),
        seed,
        outputs,
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    write_json(&manifest, &out_dir.join("manifest.json"))
}
