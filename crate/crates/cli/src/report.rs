use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use quadconc_core::fmt::sig17;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

/// Provenance block embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(argv: &[String]) -> Result<Self, CliError> {
        Ok(Self {
            command: argv.join(" "),
            inputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp()?,
        })
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, role: &'static str, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::Usage(format!("cannot read {role} file {}: {e}", path.display()))
        })?;
        self.inputs.push(InputDigest {
            role,
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes)
            .map_err(|_| CliError::Usage(format!("{role} file {} is not UTF-8", path.display())))
    }
}

/// `SOURCE_DATE_EPOCH` when set, so reruns can be byte-identical.
fn timestamp() -> Result<String, CliError> {
    let at = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(s) => s
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(|secs| OffsetDateTime::from_unix_timestamp(secs).ok())
            .ok_or_else(|| {
                CliError::Usage(format!("SOURCE_DATE_EPOCH={s:?} is not a Unix time"))
            })?,
        Err(_) => OffsetDateTime::now_utc()
            .replace_nanosecond(0)
            .expect("0 ns is valid"),
    };
    Ok(at
        .format(&Rfc3339)
        .expect("RFC 3339 formatting of a valid time"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => sig17(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// A finished report: structured data for JSON, a flat table plus
/// `key: value` notes for CSV.
pub struct Report {
    pub manifest: RunManifest,
    pub data: Value,
    pub notes: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(manifest: RunManifest, data: impl Serialize, columns: Vec<&'static str>) -> Self {
        Self {
            manifest,
            data: serde_json::to_value(data).expect("report data serializes"),
            notes: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.notes.push((key.to_owned(), value.into().render()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = serde_json::json!({ "manifest": self.manifest, "data": self.data });
                let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.render_csv(),
        }
    }

    fn render_csv(&self) -> String {
        let m = &self.manifest;
        let mut out = String::new();
        let _ = writeln!(out, "# tool_version: {}", m.tool_version);
        let _ = writeln!(out, "# command: {}", m.command);
        for input in &m.inputs {
            let _ = writeln!(
                out,
                "# input: {} {} sha256={}",
                input.role, input.path, input.sha256
            );
        }
        if let Some(seed) = m.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        let _ = writeln!(out, "# timestamp: {}", m.timestamp);
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn emit(&self, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
        let text = self.render(format);
        match out {
            Some(path) => std::fs::write(path, text).map_err(|e| {
                CliError::Usage(format!("cannot write report to {}: {e}", path.display()))
            }),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| CliError::Usage(format!("cannot write report: {e}")))
            }
        }
    }
}
