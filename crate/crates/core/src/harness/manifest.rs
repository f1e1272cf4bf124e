//! Plain-text JSON manifests: the effective configuration plus a SHA-256 of
//! every artifact a command wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, MANIFEST_VERSION};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the run directory.
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub command: String,
    pub package_version: String,
    /// The configuration after command-line overrides; re-running it
    /// reproduces every artifact.
    pub config_toml: String,
    pub artifacts: Vec<Artifact>,
    pub summary: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex(&Sha256::digest(&bytes)))
}

/// First 16 hex digits of the SHA-256 of a serializable value.
pub fn short_hash(value: &impl Serialize) -> String {
    let json = serde_json::to_vec(value).expect("serializable");
    hex(&Sha256::digest(&json))[..16].to_string()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, summary: serde_json::Value) -> Result<Self> {
        Ok(Self {
            manifest_version: MANIFEST_VERSION,
            command: command.to_string(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            config_toml: config.to_toml()?,
            artifacts: Vec::new(),
            summary,
        })
    }

    /// Hashes `relative` inside `dir` and records it.
    pub fn add_artifact(&mut self, dir: &Path, relative: impl Into<PathBuf>) -> Result<()> {
        let relative = relative.into();
        let full = dir.join(&relative);
        let bytes = fs::metadata(&full)?.len();
        self.artifacts.push(Artifact {
            sha256: sha256_file(&full)?,
            path: relative,
            bytes,
        });
        Ok(())
    }

    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(Self::file_name(&self.command));
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::MissingArtifact(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(&self.config_toml)
    }

    /// Artifacts whose current hash differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut changed = Vec::new();
        for a in &self.artifacts {
            let full = dir.join(&a.path);
            if !full.exists() || sha256_file(&full)? != a.sha256 {
                changed.push(a.path.clone());
            }
        }
        Ok(changed)
    }
}
