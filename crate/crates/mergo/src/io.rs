//! Output files: atomic writes, unit-tagged tables, JSON lines and the dense
//! matrix format.
//!
//! Matrix files are plain text. The first line is `mergo-matrix <dim> <tag>`;
//! each following line holds one row as `dim` pairs of `re im`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use mergo_core::{CMatrix, C64};

use crate::config::Format;
use crate::CliError;

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("record serializes"));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Column headers carry their unit in brackets, e.g. `v[m/s]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Runtime(e.to_string());
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }

    /// Writes `<stem>.csv` or `<stem>.json`; returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf, CliError> {
        match format {
            Format::Csv => {
                let path = dir.join(format!("{stem}.csv"));
                write_atomic(&path, &self.to_csv()?)?;
                Ok(path)
            }
            Format::Json => {
                let path = dir.join(format!("{stem}.json"));
                write_json(&path, self)?;
                Ok(path)
            }
        }
    }
}

/// `tag` names the content, e.g. `external` or `density`.
pub fn format_matrix(m: &CMatrix, tag: &str) -> String {
    let mut out = format!("mergo-matrix {} {tag}\n", m.nrows());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e} {:e}", m[(r, c)].re, m[(r, c)].im)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<(CMatrix, String), CliError> {
    let bad = |m: String| CliError::Config(format!("matrix file: {m}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty".into()))?.split_whitespace().collect();
    let (dim, tag) = match header.as_slice() {
        ["mergo-matrix", dim, tag] => (
            dim.parse::<usize>().map_err(|e| bad(format!("dimension: {e}")))?,
            tag.to_string(),
        ),
        _ => return Err(bad("header must read 'mergo-matrix <dim> <tag>'".into())),
    };
    let mut m = CMatrix::zeros(dim, dim);
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        if r >= dim {
            return Err(bad(format!("more than {dim} rows")));
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| bad(format!("row {r}: {e}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 2 * dim {
            return Err(bad(format!("row {r} has {} numbers, expected {}", vals.len(), 2 * dim)));
        }
        for c in 0..dim {
            m[(r, c)] = C64::new(vals[2 * c], vals[2 * c + 1]);
        }
        rows += 1;
    }
    if rows != dim {
        return Err(bad(format!("{rows} rows, expected {dim}")));
    }
    Ok((m, tag))
}

pub fn read_matrix(path: &Path) -> Result<(CMatrix, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text)
}
