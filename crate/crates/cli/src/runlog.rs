//! Append-only JSON-lines run log.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub timestamp: String,
    pub command: String,
    /// Effective arguments after merging the config file; replaying them reproduces the output.
    pub args: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub exit_code: u8,
    pub output_sha256: String,
}

pub fn digest(output: &str) -> String {
    hex::encode(Sha256::digest(output.as_bytes()))
}

impl RunRecord {
    pub fn new(
        command: &str,
        args: Vec<String>,
        config: BTreeMap<String, String>,
        seed: u64,
        exit_code: u8,
        output: &str,
    ) -> Self {
        RunRecord {
            timestamp: chrono::Utc::now().to_rfc3339(),
            command: command.to_string(),
            args,
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            exit_code,
            output_sha256: digest(output),
        }
    }

    pub fn append(&self, path: &Path) -> std::io::Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        let line = serde_json::to_string(self).expect("run records serialize");
        writeln!(file, "{line}")
    }
}
