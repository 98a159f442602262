use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One cell of a tabular artifact.
pub enum Cell {
    Text(String),
    Num(f64),
    Int(usize),
    Missing,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            // Display on f64 is the shortest string that round-trips
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Text(s) => s.clone().into(),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into),
            Cell::Int(v) => (*v).into(),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Writes artifacts into one directory, each through a temporary file that
/// is renamed into place only once complete.
pub struct Artifacts {
    dir: PathBuf,
    format: Format,
}

impl Artifacts {
    pub fn new(dir: &Path, format: Format) -> Self {
        Artifacts { dir: dir.to_path_buf(), format }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let target = self.path(name);
        let parent = target.parent().unwrap_or(&self.dir).to_path_buf();
        fs::create_dir_all(&parent).map_err(|e| Failure::io(&parent, e))?;
        let mut tmp = NamedTempFile::new_in(&parent).map_err(|e| Failure::io(&parent, e))?;
        tmp.write_all(bytes).map_err(|e| Failure::io(&target, e))?;
        tmp.persist(&target).map_err(|e| Failure::io(&target, e.error))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::other(e.to_string()))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Writes `<stem>.csv` or `<stem>.json` depending on the output format.
    pub fn write_table(&self, stem: &str, table: &Table) -> Result<PathBuf, Failure> {
        match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.headers).map_err(|e| Failure::other(e.to_string()))?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::render)).map_err(|e| Failure::other(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Failure::other(e.to_string()))?;
                self.write_bytes(&format!("{stem}.csv"), &bytes)
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                    .rows
                    .iter()
                    .map(|r| table.headers.iter().cloned().zip(r.iter().map(Cell::json)).collect())
                    .collect();
                self.write_json(&format!("{stem}.json"), &rows)
            }
        }
    }
}
