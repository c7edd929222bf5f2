//! File emission: every file goes through [`OutputDir::write`] so the
//! manifest lists it once with its digest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

pub struct OutputDir {
    root: PathBuf,
    files: Vec<Value>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_error(root, e))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        self.files.push(json!({
            "bytes": bytes.len(),
            "name": name,
            "sha256": sha256_hex(bytes),
        }));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        self.write(name, &json_bytes(value))
    }

    /// Write `manifest.json` listing everything written so far.
    pub fn finish(mut self, command: &str, config: Value, timings: &Timings) -> Result<PathBuf, CliError> {
        let files = std::mem::take(&mut self.files);
        let manifest = json!({
            "command": command,
            "config": config,
            "files": files,
            "timings_s": timings.to_json(),
            "version": env!("CARGO_PKG_VERSION"),
        });
        let path = self.root.join(MANIFEST);
        fs::write(&path, json_bytes(&manifest)).map_err(|e| io_error(&path, e))?;
        Ok(self.root)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Pretty JSON with keys in alphabetical order and a trailing newline.
pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("JSON values always serialize");
    out.push(b'\n');
    out
}

/// A JSON number, or `null` for non-finite values.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a header row; every cell is a float in [`sci`] format.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| sci(*v))).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

/// Wall-clock seconds per named stage, in run order.
#[derive(Default)]
pub struct Timings {
    stages: Vec<(&'static str, f64)>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((stage, start.elapsed().as_secs_f64()));
        out
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (stage, secs) in &self.stages {
            let total = m.get(*stage).and_then(Value::as_f64).unwrap_or(0.0) + secs;
            m.insert((*stage).to_string(), number(total));
        }
        Value::Object(m)
    }
}
