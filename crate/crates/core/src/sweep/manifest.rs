use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    /// Grid coordinates in internal units (`theta_rad`, `tau1_us`, …).
    pub coords: BTreeMap<String, f64>,
    pub seeds: BTreeMap<String, u64>,
    pub status: TaskStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Everything needed to reproduce a run. Holds no wall-clock data, so
/// reruns produce identical bytes; timings go to [`TIMING_FILE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub tasks: Vec<TaskRecord>,
    pub failures: usize,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String, master_seed: u64) -> Self {
        Self {
            toolkit: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            master_seed,
            tasks: Vec::new(),
            failures: 0,
            files: Vec::new(),
        }
    }

    /// Record the inventory of `paths` relative to `root`, sorted by path.
    pub fn set_files(&mut self, root: &Path, paths: &[PathBuf]) -> Result<()> {
        let mut files = Vec::with_capacity(paths.len());
        for p in paths {
            let bytes = fs::read(p)?;
            files.push(FileRecord {
                path: relative(root, p),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        files.dedup_by(|a, b| a.path == b.path);
        self.files = files;
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Err(crate::Error::MissingInputs(vec![path
                .display()
                .to_string()]));
        }
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// `/`-separated path of `p` below `root`.
pub fn relative(root: &Path, p: &Path) -> String {
    let rel = p.strip_prefix(root).unwrap_or(p);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub command: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub elapsed_s: f64,
    pub workers: usize,
    pub tasks: BTreeMap<String, f64>,
}

impl Timing {
    pub fn new(command: &str, started: SystemTime, elapsed: Duration, workers: usize) -> Self {
        let unix = |t: SystemTime| {
            t.duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0)
        };
        Self {
            command: command.into(),
            started_unix_s: unix(started),
            finished_unix_s: unix(started + elapsed),
            elapsed_s: elapsed.as_secs_f64(),
            workers,
            tasks: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(
            dir.join(TIMING_FILE),
            serde_json::to_string_pretty(self)? + "\n",
        )?;
        Ok(())
    }
}
