//! Tables, manifests and error reports written by the runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `key: value` lines for the header, in order.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, format: OutputFormat) -> String {
        format!("{}.{}", self.name, format.extension())
    }

    /// CSV with a `#` metadata header. Numbers use the shortest form that
    /// round-trips, so output is reproducible bit for bit.
    pub fn to_csv(&self, header: &Header) -> String {
        let mut out = String::new();
        header.write_comment(&mut out);
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                write_number(&mut out, *v);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, header: &Header) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            tool: &'a str,
            version: &'a str,
            experiment: &'a str,
            manifest_sha256: &'a str,
            notes: BTreeMap<&'a str, &'a str>,
            columns: &'a [String],
            rows: &'a [Vec<f64>],
        }
        let doc = Doc {
            tool: header.tool,
            version: header.version,
            experiment: &header.experiment,
            manifest_sha256: &header.config_sha256,
            notes: self.notes.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
            columns: &self.columns,
            rows: &self.rows,
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, dir: &Path, format: OutputFormat, header: &Header) -> Result<String> {
        let name = self.file_name(format);
        let body = match format {
            OutputFormat::Csv => self.to_csv(header),
            OutputFormat::Json => self.to_json(header)?,
        };
        fs::write(dir.join(&name), body)?;
        Ok(name)
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
fn write_number(out: &mut String, v: f64) {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        let _ = write!(out, "{v}");
    } else {
        let _ = write!(out, "{v:e}");
    }
}

/// Identification stamped on every data file.
#[derive(Debug, Clone)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config_sha256: String,
}

impl Header {
    fn write_comment(&self, out: &mut String) {
        let _ = writeln!(out, "# {} {}", self.tool, self.version);
        let _ = writeln!(out, "# experiment: {}", self.experiment);
        let _ = writeln!(out, "# manifest_sha256: {}", self.config_sha256);
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Run record written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    /// SHA-256 of `config_text` followed by the version line; the hash
    /// stamped into every data file.
    pub config_sha256: String,
    pub config: BTreeMap<String, String>,
    /// Canonical `key = value` text; feeding it back reproduces the outputs.
    pub config_text: String,
    pub derived: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    pub format: OutputFormat,
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        fs::write(dir.join("manifest.json"), s)?;
        Ok(())
    }
}

/// Failure record written as `error.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub stage: String,
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl ErrorReport {
    pub fn new(stage: &str, err: &Error) -> Self {
        let (kind, key, line) = match err {
            Error::Domain(_) => ("domain", None, None),
            Error::Singularity(_) => ("singularity", None, None),
            Error::Resolution { .. } => ("resolution", None, None),
            Error::Numerical(_) => ("numerical", None, None),
            Error::Config { key, line, .. } => ("config", key.clone(), *line),
            Error::Io(_) => ("io", None, None),
            Error::Json(_) => ("json", None, None),
        };
        ErrorReport {
            stage: stage.to_string(),
            kind,
            message: err.to_string(),
            exit_code: err.exit_code(),
            key,
            line,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        fs::write(dir.join("error.json"), s)?;
        Ok(())
    }
}
