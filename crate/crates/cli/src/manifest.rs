//! Run manifests: what was run, with which generator, and what it wrote.

use std::fs;
use std::path::Path;

use arrowlab_core::rng::GENERATOR_ID;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

impl OutputDigest {
    pub fn of(file: &str, contents: &[u8]) -> Self {
        OutputDigest {
            file: file.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub command: String,
    pub artifact_version: String,
    pub generator: String,
    /// Effective config after command-line overrides.
    pub config: Value,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, started_at: String) -> Self {
        RunManifest {
            manifest_version: MANIFEST_VERSION,
            command: command.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR_ID.to_string(),
            config,
            started_at,
            finished_at: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serialises to JSON");
        bytes.push(b'\n');
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("manifest: {e}")))
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
