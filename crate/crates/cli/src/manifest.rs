use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub started_unix: u64,
    pub runtime_seconds: f64,
}

pub struct ManifestBuilder {
    command: String,
    started: Instant,
    started_unix: u64,
}

impl ManifestBuilder {
    pub fn start(command: &str) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn finish(
        self,
        config: serde_json::Value,
        seeds: Vec<u64>,
        inputs: &[&Path],
        outputs: &[&Path],
    ) -> RunManifest {
        let show = |ps: &[&Path]| ps.iter().map(|p| p.display().to_string()).collect();
        RunManifest {
            command: self.command,
            config,
            seeds,
            inputs: show(inputs),
            outputs: show(outputs),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started_unix,
            runtime_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
