use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sme_core::experiments::sha256_hex;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Incomplete,
    Complete,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Warnings {
    pub truncation_warnings: usize,
    pub max_edge_population: f64,
    /// Samples where a broken state made a correlation measure undefined.
    pub observable_failures: usize,
    /// Trajectories of non-Kraus schemes whose states needed repair.
    pub repaired_states: usize,
    pub failed_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub status: RunStatus,
    pub seed: u64,
    pub scale: f64,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    /// Resolved configuration, all defaults materialized.
    pub config: Map<String, Value>,
    pub file_values: Map<String, Value>,
    pub overrides: Map<String, Value>,
    pub outputs: Vec<OutputFile>,
    pub warnings: Warnings,
    pub error: Option<String>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST_FILE)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        // write-then-rename so a reader never sees a half-written manifest
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        std::fs::write(&tmp, text)?;
        std::fs::rename(tmp, Self::path(dir))
    }

    pub fn read(dir: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(Self::path(dir))?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn add_output(&mut self, dir: &Path, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let rel = path.strip_prefix(dir).unwrap_or(path);
        self.outputs.push(OutputFile {
            path: rel.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Files whose current content no longer matches the recorded checksum.
    pub fn stale_outputs(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|o| std::fs::read(dir.join(&o.path)).map_or(true, |b| sha256_hex(&b) != o.sha256))
            .map(|o| o.path.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            tool_version: "0".into(),
            command: "run".into(),
            status: RunStatus::Incomplete,
            seed: 1,
            scale: 1.0,
            started_unix: unix_now(),
            finished_unix: None,
            config: Map::new(),
            file_values: Map::new(),
            overrides: Map::new(),
            outputs: Vec::new(),
            warnings: Warnings::default(),
            error: None,
        }
    }

    #[test]
    fn checksums_track_file_content() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x.csv");
        std::fs::write(&f, "a\n1\n").unwrap();
        let mut m = manifest();
        m.add_output(dir.path(), &f).unwrap();
        assert_eq!(m.outputs[0].path, "x.csv");
        assert!(m.stale_outputs(dir.path()).is_empty());
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap(), m);
        std::fs::write(&f, "a\n2\n").unwrap();
        assert_eq!(m.stale_outputs(dir.path()), vec!["x.csv".to_string()]);
    }
}
