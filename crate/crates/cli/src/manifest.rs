use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use ecoplatoon_core::ScenarioConfig;

pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Git blob hash of `content`, computed with SHA-256:
/// `sha256("blob <len>\0" ++ content)`.
pub fn content_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Everything needed to re-run a command: the resolved configuration (also
/// written verbatim next to the manifest), the seeds it consumed and where
/// its outputs went.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: ScenarioConfig,
    pub config_file: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub out_dir: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &ScenarioConfig, out_dir: &Path, started: f64) -> Self {
        let toml = config.to_toml_string();
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config: config.clone(),
            config_file: CONFIG_FILE.to_string(),
            config_hash: content_hash(toml.as_bytes()),
            seeds: Vec::new(),
            out_dir: out_dir.display().to_string(),
            started_unix_s: started,
            finished_unix_s: started,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Writes `config.toml` and `manifest.json` into the output directory.
    pub fn write(mut self, out_dir: &Path) -> std::io::Result<()> {
        std::fs::write(out_dir.join(CONFIG_FILE), self.config.to_toml_string())?;
        self.finished_unix_s = unix_now();
        let json = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        std::fs::write(out_dir.join(MANIFEST_FILE), json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_git_blob_layout() {
        // sha256 of "blob 0\0", the empty blob in a SHA-256 git repository
        assert_eq!(
            content_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    #[test]
    fn hash_depends_on_content() {
        assert_ne!(content_hash(b"a"), content_hash(b"b"));
        assert_eq!(content_hash(b"a").len(), 64);
    }
}
