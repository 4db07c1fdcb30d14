//! Output directories, atomic file writes and run manifests.

use crate::config::sha256_hex;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of one run. Everything except the two timestamps is reproduced
/// by re-running the same config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    /// True when the two manifests agree in everything but timestamps.
    pub fn same_outputs(&self, other: &RunManifest) -> bool {
        self.command == other.command
            && self.code_version == other.code_version
            && self.config_hash == other.config_hash
            && self.seed == other.seed
            && self.files == other.files
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

pub fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

/// I/O failure on a named path.
#[derive(Debug)]
pub struct IoFailure {
    pub path: PathBuf,
    pub source: io::Error,
}

impl std::fmt::Display for IoFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.source)
    }
}

impl std::error::Error for IoFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Files written by one run. Dropping it without [`finish`](Self::finish)
/// deletes everything written so far.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<FileRecord>,
    done: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, IoFailure> {
        fs::create_dir_all(dir).map_err(|source| IoFailure {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            done: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), IoFailure> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| IoFailure {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        write_atomic(&path, bytes).map_err(|source| IoFailure { path, source })?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes `manifest.json` listing every file and keeps the outputs.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<RunManifest, IoFailure> {
        manifest.files = self.files.clone();
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.dir.join("manifest.json");
        write_atomic(&path, text.as_bytes()).map_err(|source| IoFailure { path, source })?;
        self.done = true;
        Ok(manifest)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.done && !self.files.is_empty() {
            for f in &self.files {
                let _ = fs::remove_file(self.dir.join(&f.path));
            }
            // a manifest from an earlier run would now point at missing files
            let _ = fs::remove_file(self.dir.join("manifest.json"));
        }
    }
}

/// Shortest text that parses back to the same f64, in exponent form
/// outside [1e-4, 1e6).
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Comma-separated table with a header row.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[f64]) {
        debug_assert_eq!(cells.len(), self.columns);
        let row: Vec<String> = cells.iter().copied().map(fmt_num).collect();
        self.text.push_str(&row.join(","));
        self.text.push('\n');
    }

    /// Row with some cells left empty.
    pub fn row_opt(&mut self, cells: &[Option<f64>]) {
        debug_assert_eq!(cells.len(), self.columns);
        let row: Vec<String> = cells.iter().map(|v| v.map(fmt_num).unwrap_or_default()).collect();
        self.text.push_str(&row.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}
