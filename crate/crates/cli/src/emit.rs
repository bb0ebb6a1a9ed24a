//! Tabular output: CSV with one header row, or JSON `{"spec": ..., "rows": [...]}`.
//!
//! Floats are written with 17 significant digits in both formats, so every
//! value round-trips exactly and repeated runs are byte-identical.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use dirac_delta::Complex64;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

/// `{:.16e}` is 17 significant digits; non-finite values keep Rust's spelling.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) if x.is_finite() => {
                Value::Number(Number::from_str(&format_float(*x)).expect("formatted float is valid JSON"))
            }
            Cell::Float(_) => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Column names plus rows in emission order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Builds one row; complex values expand to `<name>_re`, `<name>_im`.
#[derive(Debug, Default)]
pub struct Row {
    names: Vec<String>,
    cells: Vec<Cell>,
}

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(mut self, name: &str, value: impl Into<Cell>) -> Self {
        self.names.push(name.to_owned());
        self.cells.push(value.into());
        self
    }

    pub fn complex(self, name: &str, z: Complex64) -> Self {
        self.put(&format!("{name}_re"), z.re).put(&format!("{name}_im"), z.im)
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Table whose header comes from the first row built with [`Row`];
    /// `header` supplies it when there are no rows.
    pub fn from_rows(header: Row, rows: Vec<Row>) -> Self {
        let columns = rows.first().map_or(header.names, |r| r.names.clone());
        debug_assert!(rows.iter().all(|r| r.names == columns), "rows disagree on columns");
        Self {
            columns,
            rows: rows.into_iter().map(|r| r.cells).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_text))?;
        }
        w.flush()
    }

    pub fn to_json(&self, spec: Value) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("spec".into(), spec);
        top.insert("rows".into(), Value::Array(rows));
        Value::Object(top)
    }

    pub fn write<W: Write>(&self, format: Format, spec: &Value, mut out: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.to_json(spec.clone()))?;
                out.write_all(b"\n")?;
                out.flush()
            }
        }
    }
}

/// Write `table` to `path`, or to stdout when `path` is `None`.
pub fn emit(table: &Table, format: Format, spec: &Value, path: Option<&Path>) -> Result<(), String> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?;
            table
                .write(format, spec, BufWriter::new(file))
                .map_err(|e| format!("writing {}: {e}", p.display()))
        }
        None => table
            .write(format, spec, io::stdout().lock())
            .map_err(|e| format!("writing to stdout: {e}")),
    }
}

/// `out.csv` → `out_<suffix>.csv`, for the secondary tables of a run.
pub fn sibling_path(path: &Path, suffix: &str, format: Format) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{suffix}.{}", format.extension()))
}
