//! Collected results of a run and their serialized emission: CSV tables with
//! 17 significant digits, a JSON summary and a manifest with hashes.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Cell::Real(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Real(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &str, header: &[&'static str]) -> Self {
        Self { file: file.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// One call into the numerical core and what it fed.
#[derive(Debug, Clone, Serialize)]
pub struct Operation {
    pub command: String,
    pub operation: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, Default)]
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub sections: Map<String, Value>,
    pub operations: Vec<Operation>,
    /// Failed checks, by name.
    pub failures: Vec<String>,
}

impl Artifacts {
    pub fn log(&mut self, command: &str, operation: &str, outputs: &[&str]) {
        self.operations.push(Operation {
            command: command.into(),
            operation: operation.into(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        });
    }

    /// Records a pass/fail check under `section`.
    pub fn check(&mut self, section: &str, name: &str, passed: bool) -> Value {
        if !passed {
            self.failures.push(format!("{section}.{name}"));
        }
        Value::Bool(passed)
    }

    pub fn section(&mut self, name: &str, body: Value) {
        self.sections.insert(name.into(), body);
    }

    /// Writes every table, `summary.json`, `config.json` and `manifest.json`.
    pub fn write(&self, dir: &Path, command: &str, cfg: &ExperimentConfig) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        let mut emit = |name: &str, bytes: Vec<u8>| -> std::io::Result<()> {
            std::fs::write(dir.join(name), &bytes)?;
            files.push(json!({ "file": name, "sha256": hex::encode(Sha256::digest(&bytes)) }));
            Ok(())
        };
        for t in &self.tables {
            emit(&t.file, t.to_bytes().map_err(std::io::Error::other)?)?;
        }
        let summary = json!({
            "command": command,
            "tolerances": cfg.tolerances,
            "sections": self.sections,
            "verification": { "passed": self.failures.is_empty(), "failures": self.failures },
        });
        emit("summary.json", pretty(&summary))?;
        emit("config.json", pretty(cfg))?;
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_sha256": cfg.digest(),
            "seed": cfg.seed,
            "operations": self.operations,
            "files": files,
        });
        std::fs::write(dir.join("manifest.json"), pretty(&manifest))
    }
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("serializable");
    bytes.push(b'\n');
    bytes
}
