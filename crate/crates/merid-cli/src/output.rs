use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::config::Resolved;
use crate::error::{usage, CliResult};

/// 17 significant digits: exact round trip for f64.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Default, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv::default();
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    /// `# key: value` line, placed before the header by `with_meta`.
    pub fn with_meta(meta: &[(&str, String)], header: &[&str]) -> Self {
        let mut text = String::new();
        for (k, v) in meta {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        let mut c = Csv { text };
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let line: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl OutputFile {
    pub fn csv(name: impl Into<String>, c: Csv) -> Self {
        OutputFile { name: name.into(), contents: c.into_bytes() }
    }

    pub fn json(name: impl Into<String>, v: &impl Serialize) -> Self {
        let mut contents = serde_json::to_vec_pretty(v).expect("serializable");
        contents.push(b'\n');
        OutputFile { name: name.into(), contents }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// SOURCE_DATE_EPOCH when set, wall clock otherwise.
pub fn timestamp() -> CliResult<String> {
    let secs = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => s.trim().parse::<i64>().map_err(|_| usage(format!("SOURCE_DATE_EPOCH is not an integer: '{s}'")))?,
        Err(_) => SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0),
    };
    let t = OffsetDateTime::from_unix_timestamp(secs).map_err(|e| usage(format!("SOURCE_DATE_EPOCH: {e}")))?;
    Ok(t.format(&Rfc3339).expect("RFC 3339 formatting of a valid timestamp"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_manifest(command: &str, r: &Resolved, files: &[OutputFile], timestamp: String) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        parameters: r.to_map(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
        outputs: files
            .iter()
            .map(|f| ManifestEntry { path: f.name.clone(), bytes: f.contents.len(), sha256: sha256_hex(&f.contents) })
            .collect(),
    }
}

/// Writes every file and the manifest listing them; returns the written paths.
pub fn write_all(dir: &Path, files: &[OutputFile], manifest: &RunManifest) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for f in files {
        let p = dir.join(&f.name);
        fs::write(&p, &f.contents)?;
        out.push(p);
    }
    let m = OutputFile::json(MANIFEST_NAME, manifest);
    let p = dir.join(MANIFEST_NAME);
    fs::write(&p, &m.contents)?;
    out.push(p);
    Ok(out)
}
