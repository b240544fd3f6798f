//! Result tables, plot data and manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

/// Column names carry SI unit suffixes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// The named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Table, CliError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n).ok_or_else(|| CliError::Invalid(format!("no column '{n}'"))))
            .collect::<Result<_, _>>()?;
        Ok(Table {
            columns: names.iter().map(|n| n.to_string()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(),
        })
    }

    /// CSV text, preceded by `#` comment lines.
    pub fn to_csv(&self, comments: &[String]) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for c in comments {
            writeln!(buf, "# {c}").expect("write to memory");
        }
        let mut w = csv::Writer::from_writer(buf);
        let csv_err = |e: csv::Error| CliError::Invalid(format!("csv encoding: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Invalid(format!("csv encoding: {}", e.error())))
    }
}

/// Write `bytes` to a temporary file next to `path`, then rename it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(std::io::Error::new(e.kind(), "cannot create a temporary file")))?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(std::io::Error::new(e.error.kind(), "rename into place failed")))?;
    Ok(())
}

/// Plain CSV with the given columns. An empty table is an error and
/// nothing is written.
pub fn emit_plot_data(table: &Table, path: &Path) -> Result<(), CliError> {
    if table.is_empty() {
        return Err(CliError::EmptyTable);
    }
    write_atomic(path, &table.to_csv(&[])?)
}

/// `sha256` of the library version and the canonical configuration text.
pub fn manifest_hash(config_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("casimir-cli {}\n", env!("CARGO_PKG_VERSION")));
    h.update(config_text.as_bytes());
    hex::encode(h.finalize())
}

/// `results.csv` -> `results.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub manifest_hash: String,
    pub version: String,
    pub command: String,
    /// Canonical configuration; feeding it back through `--config`
    /// reproduces the run.
    pub config: String,
    pub constants: casimir_core::PhysicalConstants,
    pub converged: bool,
    pub results: Table,
    pub outputs: Vec<PathBuf>,
    pub timing: Timing,
}
