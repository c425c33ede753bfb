//! Output files of a run.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// A CSV table held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self::with_header(file, header.iter().map(|h| h.to_string()).collect())
    }

    pub fn with_header(file: &str, header: Vec<String>) -> Self {
        Self {
            file: file.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report_json: String,
    pub summary: String,
    pub tables: Vec<Table>,
    pub verdict: bool,
}

impl RunArtifacts {
    /// Writes `report.json`, `summary.txt` and the tables into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.json"), &self.report_json)?;
        fs::write(dir.join("summary.txt"), &self.summary)?;
        for t in &self.tables {
            fs::write(dir.join(&t.file), t.to_csv()?)?;
        }
        Ok(())
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }
}

/// Shortest round-trip formatting, the same digits the JSON report uses.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
    } else {
        x.to_string()
    }
}

pub fn bool_cell(b: bool) -> String {
    if b { "true" } else { "false" }.into()
}
