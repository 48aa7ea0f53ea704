//! Run manifests: inputs plus SHA-256 digests of every output file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_error, AtlasError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<reachcloud_core::SamplerConfig>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub wall_clock_s: f64,
    /// Free-form run parameters (design JSON, radius, notes, ...).
    #[serde(default)]
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Output paths relative to the manifest's directory, mapped to SHA-256.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            tool_version: reachcloud_core::TOOL_VERSION.to_string(),
            command: command.into(),
            design_digest: None,
            sampler: None,
            seeds: Vec::new(),
            wall_clock_s: 0.0,
            parameters: BTreeMap::new(),
            files: BTreeMap::new(),
        }
    }

    /// Records `file`, which must live under `base`.
    pub fn add_file(&mut self, base: &Path, file: &Path) -> Result<()> {
        let rel = file
            .strip_prefix(base)
            .unwrap_or(file)
            .to_string_lossy()
            .replace('\\', "/");
        self.files.insert(rel, sha256_file(file)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(io_error(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        serde_json::from_str(&text).map_err(|e| AtlasError::Parse {
            what: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Files whose current digest differs from the recorded one, or that are
    /// missing, resolved against `base`.
    pub fn mismatches(&self, base: &Path) -> Vec<PathBuf> {
        self.files
            .iter()
            .filter_map(|(rel, digest)| {
                let p = base.join(rel);
                match sha256_file(&p) {
                    Ok(d) if &d == digest => None,
                    _ => Some(p),
                }
            })
            .collect()
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(io_error(path))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(io_error(path))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_verify_and_detect_edits() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.txt");
        std::fs::write(&f, "abc").unwrap();
        let mut m = RunManifest::new("test");
        m.add_file(dir.path(), &f).unwrap();
        assert_eq!(
            m.files["a.txt"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let mp = dir.path().join("m.json");
        m.write(&mp).unwrap();
        let back = RunManifest::read(&mp).unwrap();
        assert_eq!(back, m);
        assert!(back.mismatches(dir.path()).is_empty());
        std::fs::write(&f, "abd").unwrap();
        assert_eq!(back.mismatches(dir.path()), vec![f]);
    }
}
