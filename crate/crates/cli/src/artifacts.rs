//! Every file of a run goes through [`Artifacts`]: contents are buffered,
//! hashed and written in name order, and `manifest.json` lists them last.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Artifacts {
    dir: PathBuf,
    files: BTreeMap<String, Vec<u8>>,
    /// Files outside the artifact directory (`--dump-form`).
    external: BTreeMap<PathBuf, Vec<u8>>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: BTreeMap::new(), external: BTreeMap::new() }
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
    }

    pub fn text(&mut self, name: &str, text: &str) {
        self.files.insert(name.to_string(), text.as_bytes().to_vec());
    }

    /// RFC 4180 table with a header row.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
        self.files.insert(name.to_string(), csv_bytes(rows)?);
        Ok(())
    }

    pub fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_string(), bytes);
    }

    pub fn external(&mut self, path: &Path, bytes: Vec<u8>) {
        self.external.insert(path.to_path_buf(), bytes);
    }

    /// Writes every file, then the manifest with their hashes.
    pub fn finish(self, mut manifest: serde_json::Value) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)?;
        let mut hashes = BTreeMap::new();
        for (name, bytes) in &self.files {
            fs::write(self.dir.join(name), bytes)?;
            hashes.insert(name.clone(), sha256(bytes));
        }
        for (path, bytes) in &self.external {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, bytes)?;
            hashes.insert(path.display().to_string(), sha256(bytes));
        }
        manifest["artifacts"] = serde_json::to_value(hashes).expect("hashes serialize");
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(())
    }
}

pub fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}
