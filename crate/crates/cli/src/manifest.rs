use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

/// Record of one command run. The timestamp is the only field that differs
/// between identical runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_digest: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub timestamp_unix: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_artifact(path: &Path) -> io::Result<Artifact> {
    Ok(Artifact { path: path.display().to_string(), sha256: sha256_hex(&fs::read(path)?) })
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// `out` with its extension replaced by `suffix` (`"svg"`, `"folds.csv"`).
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config_digest: String, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_digest,
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    /// Writes every output atomically, checksums it, then writes the manifest
    /// next to `primary` as `<stem>.manifest.json`.
    pub fn write_outputs(mut self, primary: &Path, outputs: &[(PathBuf, Vec<u8>)]) -> io::Result<PathBuf> {
        for (path, bytes) in outputs {
            write_atomic(path, bytes)?;
            let written = file_artifact(path)?;
            if written.sha256 != sha256_hex(bytes) {
                return Err(io::Error::other(format!("checksum mismatch after writing {}", path.display())));
            }
            self.outputs.push(written);
        }
        let manifest_path = sibling(primary, "manifest.json");
        let json = serde_json::to_string_pretty(&self).expect("manifest serialises");
        write_atomic(&manifest_path, json.as_bytes())?;
        Ok(manifest_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_input() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/report.csv"), "svg"), PathBuf::from("out/report.svg"));
        assert_eq!(sibling(Path::new("data"), "manifest.json"), PathBuf::from("data.manifest.json"));
    }
}
