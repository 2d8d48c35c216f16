use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub label: String,
    pub seeds: Vec<u64>,
    pub completed: usize,
    pub diverged: usize,
}

/// Provenance record written next to a command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunEntry>,
    pub diverged: usize,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub version: String,
    pub created: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {} for its digest", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            config_path: None,
            config: BTreeMap::new(),
            inputs: Vec::new(),
            seeds: Vec::new(),
            runs: Vec::new(),
            diverged: 0,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: sha256_file(path)? });
        Ok(())
    }

    pub fn add_output(&mut self, out_dir: &Path, path: &Path) {
        let rel = path.strip_prefix(out_dir).unwrap_or(path);
        self.outputs.push(rel.display().to_string());
    }

    /// Checks every listed output exists, then writes `manifest.json`.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        for output in &self.outputs {
            if !out_dir.join(output).is_file() {
                bail!("declared output {output} was not written");
            }
        }
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
