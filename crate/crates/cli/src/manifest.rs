//! JSON run manifests written next to each output.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Map<String, Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seeds: Vec<u64>,
    pub rng: Option<&'static str>,
    pub wall_clock_s: f64,
    pub events: Option<u64>,
    pub meps: Option<f64>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub extra: Map<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "evfilt",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seeds: Vec::new(),
            rng: None,
            wall_clock_s: 0.0,
            events: None,
            meps: None,
            extra: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(key.to_string(), serde_json::to_value(value).expect("plain values serialize"));
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(digest(path)?);
        Ok(())
    }

    /// Writes the manifest to `explicit`, else beside `primary`, else to stderr.
    pub fn emit(&self, explicit: Option<&Path>, primary: Option<&Path>) -> Result<Option<PathBuf>> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))? + "\n";
        let path = explicit.map(Path::to_path_buf).or_else(|| primary.map(sidecar));
        match path {
            Some(p) => {
                std::fs::write(&p, text)?;
                Ok(Some(p))
            }
            None => {
                eprint!("{text}");
                Ok(None)
            }
        }
    }
}

pub fn sidecar(primary: &Path) -> PathBuf {
    let mut name = primary.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn digest(path: &Path) -> Result<FileDigest> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    })
}
