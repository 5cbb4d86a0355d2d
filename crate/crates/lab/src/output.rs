//! CSV tables with `#` metadata lines, summaries and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // shortest round-trip representation, stable across runs
            Cell::Num(v) => write!(f, "{v:e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// One output file. Column names carry their unit in brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|c| c.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Scalar result shown on stdout and written to `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub quantity: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub summary: Vec<Summary>,
    /// Non-fatal diagnostics (impulse approximation, non-exponential decay).
    pub warnings: Vec<String>,
}

impl Report {
    pub fn add(&mut self, quantity: &str, value: f64, unit: &str) {
        self.summary.push(Summary { quantity: quantity.into(), value, unit: unit.into() });
    }

    pub fn get(&self, quantity: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.quantity == quantity).map(|s| s.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_table(&self, scenario: &str) -> Table {
        let mut t = Table::new("summary.csv", &["quantity", "value", "unit"]).meta("scenario", scenario);
        for s in &self.summary {
            t.push(vec![Cell::Text(s.quantity.clone()), Cell::Num(s.value), Cell::Text(s.unit.clone())]);
        }
        for w in &self.warnings {
            t.meta.push(("warning".into(), w.clone()));
        }
        t
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub scenario: String,
    pub scenario_sha256: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub files: Vec<(String, String)>,
}

impl Manifest {
    /// Same `key = value` grammar as scenario files.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "scenario_sha256 = {}", self.scenario_sha256);
        let _ = writeln!(s, "tool_version = {}", self.tool_version);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time_s);
        let _ = writeln!(s, "\n[files]");
        for (name, hash) in &self.files {
            let _ = writeln!(s, "{} = {}", name.replace('.', "_"), hash);
        }
        s
    }
}

/// Writes every table plus `summary.csv`; returns `(file name, sha256)`.
pub fn write_report(dir: &Path, scenario: &str, report: &Report) -> io::Result<Vec<(String, String)>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = report.summary_table(scenario);
    for t in report.tables.iter().chain(std::iter::once(&summary)) {
        let body = t.to_csv();
        let path: PathBuf = dir.join(&t.name);
        fs::write(&path, body.as_bytes())?;
        written.push((t.name.clone(), sha256_hex(body.as_bytes())));
    }
    Ok(written)
}
