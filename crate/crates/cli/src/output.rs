use std::fs;
use std::path::{Path, PathBuf};

use phdae_core::export::CsvTable;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug)]
struct Entry {
    path: String,
    bytes: usize,
    sha256: String,
}

/// Writes artifacts below one directory and remembers their hashes.
#[derive(Debug)]
pub struct Artifacts {
    root: PathBuf,
    entries: Vec<Entry>,
}

fn hex(digest: &[u8]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Artifacts {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(root).map_err(|e| Failure::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, rel: &str, data: &[u8]) -> Result<(), Failure> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        fs::write(&path, data).map_err(|e| Failure::io(&path, e))?;
        self.entries.push(Entry {
            path: rel.to_string(),
            bytes: data.len(),
            sha256: hex(&Sha256::digest(data)),
        });
        Ok(())
    }

    pub fn write_csv(&mut self, rel: &str, table: &CsvTable) -> Result<(), Failure> {
        self.write_bytes(rel, table.to_csv().as_bytes())
    }

    pub fn write_json(&mut self, rel: &str, value: &Value) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.write_bytes(rel, text.as_bytes())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, command: &str, model: &str, args: &[String], summary: Value) -> Result<(), Failure> {
        let files: Vec<Value> = self
            .entries
            .iter()
            .map(|e| json!({ "path": e.path, "bytes": e.bytes, "sha256": e.sha256 }))
            .collect();
        let manifest = json!({
            "tool": "phdae",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "model": model,
            "args": args,
            "summary": summary,
            "files": files,
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("json values serialize");
        text.push('\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))
    }
}
