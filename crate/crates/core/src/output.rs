//! CSV and JSON datasets plus the manifest that lists every emitted file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::FigureDataset;

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

/// Comma-separated table with a header row and `\n` line endings.
pub fn to_csv(columns: &[String], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(columns).map_err(fail)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_number(*v))).map_err(fail)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Reads a numeric CSV back into its header and rows.
pub fn from_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header = r
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        rows.push(
            rec.iter()
                .map(|f| parse_number(f).ok_or_else(|| Error::Io(format!("not a number: `{f}`"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to regenerate a set of outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Configuration in the `key = value` schema.
    pub config: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files and writes them with a manifest.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        OutputSet {
            dir: dir.into(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_dataset(&mut self, stem: &str, ds: &FigureDataset) -> Result<()> {
        self.add(format!("{stem}.csv"), to_csv(&ds.columns, &ds.rows)?);
        let json = serde_json::to_vec_pretty(ds).map_err(|e| Error::Io(e.to_string()))?;
        self.add(format!("{stem}.json"), json);
        Ok(())
    }

    /// Writes all files plus `<manifest_stem>.manifest.json`; returns the written paths.
    pub fn write(self, manifest_stem: &str, command: &str, seed: u64, config: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)?;
        let mut written = Vec::new();
        let mut entries = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes)?;
            entries.push(FileEntry {
                name: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            });
            written.push(path);
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config: config.into(),
            files: entries,
        };
        let path = self.dir.join(format!("{manifest_stem}.manifest.json"));
        let mut json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        json.push(b'\n');
        fs::write(&path, json)?;
        written.push(path);
        Ok(written)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Io(e.to_string()))
}
