//! Atomic file output and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, json_err, Result};

/// Writes `contents` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err(dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir.display()))?;
    tmp.write_all(contents).map_err(io_err(path.display()))?;
    tmp.persist(path).map_err(|e| e.error).map_err(io_err(path.display()))?;
    Ok(())
}

/// Writes to `path` when given, otherwise to standard output.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes()).map_err(io_err("stdout"))?;
            out.flush().map_err(io_err("stdout"))
        }
    }
}

pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value).map_err(json_err("output"))?;
    s.push('\n');
    Ok(s)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(json_err("output"))?;
    s.push('\n');
    Ok(s)
}

/// Everything needed to re-run a command. Carries no timestamps, so reruns
/// produce identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, without `--out`.
    pub argv: Vec<String>,
    pub cwd: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub scale: String,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path.display()))?;
        serde_json::from_str(&text).map_err(json_err(path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, to_json_pretty(self)?.as_bytes())
    }
}

/// Manifest path for a single-file output: `points.csv` -> `points.csv.manifest.json`.
pub fn manifest_path_for(file: &Path) -> PathBuf {
    let mut name = file.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    file.with_file_name(name)
}

/// Drops `--out VALUE` and `--out=VALUE` from an argument list.
pub fn strip_out(args: &[String]) -> Vec<String> {
    let mut kept = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            kept.push(a.clone());
        }
    }
    kept
}
