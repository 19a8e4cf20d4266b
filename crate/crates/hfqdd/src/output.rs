//! CSV emission: `#`-prefixed `key=value` metadata lines, then an
//! RFC-4180 header row and numeric rows.
//!
//! Numbers are written in Rust's shortest round-trip scientific form, so a
//! value read back parses to the identical `f64` and identical inputs give
//! byte-identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

/// Metadata lines written above the header, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    /// The two lines every harness CSV carries.
    pub fn new(config_hash: &str, periodic_truncation: bool) -> Self {
        Self::default().with("config_hash", config_hash).with("periodic_truncation", periodic_truncation)
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

/// Streaming writer for one CSV file.
pub struct CsvSink {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
    width: usize,
}

impl CsvSink {
    pub fn create(path: &Path, metadata: &Metadata, header: &[&str]) -> Result<Self> {
        let io_err = |source| HarnessError::Output { path: path.to_path_buf(), source };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io_err)?;
        }
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        for (key, value) in metadata.entries() {
            writeln!(out, "# {key}={value}").map_err(io_err)?;
        }
        let mut sink = Self { path: path.to_path_buf(), writer: csv::Writer::from_writer(out), width: header.len() };
        sink.writer.write_record(header).map_err(|e| sink.csv_err(e))?;
        Ok(sink)
    }

    fn csv_err(&self, e: csv::Error) -> HarnessError {
        HarnessError::Output { path: self.path.clone(), source: std::io::Error::other(e) }
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        debug_assert_eq!(values.len(), self.width);
        let record: Vec<String> = values.iter().map(|&v| format_value(v)).collect();
        self.writer.write_record(&record).map_err(|e| self.csv_err(e))
    }

    /// A row of preformatted fields (for tables with text columns).
    pub fn record(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer.write_record(fields).map_err(|e| self.csv_err(e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|source| HarnessError::Output { path: self.path.clone(), source })
    }
}

/// A CSV file read back: metadata, header, and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let io_err = |source| HarnessError::Output { path: path.to_path_buf(), source };
        let text = std::fs::read_to_string(path).map_err(io_err)?;
        let metadata = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let bad =
            |e: &dyn std::fmt::Display| io_err(std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()));
        let header = reader.headers().map_err(|e| bad(&e))?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| bad(&e))?;
            rows.push(record.iter().map(|s| s.parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|e| bad(&e))?);
        }
        Ok(Self { metadata, header, rows })
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// All values of a named column.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}
