//! Result tables and their CSV and JSON encodings.
//!
//! A table has a fixed column list per subcommand. Each row is tagged with
//! its record kind; cells a row does not use are empty. CSV output starts
//! with `# key=value` metadata lines, then the header `record,<columns>`.
//! Summary rows are printed with 9 significant digits; all other floats use
//! the shortest representation that parses back to the same value. JSON
//! output is a single document that deserializes to an equal [`Table`].

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

/// Significant digits of floats in CSV summary rows.
pub const SUMMARY_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Replica,
    Event,
    Value,
    Summary,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Replica => "replica",
            RecordKind::Event => "event",
            RecordKind::Value => "value",
            RecordKind::Summary => "summary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// Non-finite floats are stored as text so JSON can hold them.
    pub fn float(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Float(x)
        } else if x.is_nan() {
            Cell::Text("nan".into())
        } else if x > 0.0 {
            Cell::Text("inf".into())
        } else {
            Cell::Text("-inf".into())
        }
    }

    pub fn opt_float(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::float)
    }

    pub fn int(x: u64) -> Cell {
        Cell::Int(x)
    }

    fn render(&self, summary: bool) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if summary => round_sig(*x, SUMMARY_DIGITS).to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().expect("formatted float")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub record: RecordKind,
    pub values: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            metadata: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.insert(key.to_owned(), value.to_string());
        self
    }

    /// Adds a row from `(column, value)` pairs; unnamed columns stay empty.
    pub fn push(&mut self, record: RecordKind, cells: Vec<(&str, Cell)>) {
        let mut values = vec![Cell::Empty; self.columns.len()];
        for (name, cell) in cells {
            let idx = self
                .columns
                .iter()
                .position(|c| c == name)
                .unwrap_or_else(|| panic!("unknown column `{name}`"));
            values[idx] = cell;
        }
        self.rows.push(Row { record, values });
    }

    pub fn rows_of(&self, record: RecordKind) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.record == record)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell of the first row of `record` in column `name`.
    pub fn get(&self, record: RecordKind, name: &str) -> Option<&Cell> {
        let idx = self.column(name)?;
        self.rows_of(record).next().map(|r| &r.values[idx])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["record".to_owned()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let summary = row.record == RecordKind::Summary;
            let mut rec = vec![row.record.as_str().to_owned()];
            rec.extend(row.values.iter().map(|c| c.render(summary)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| CliError::Io(e.into()))?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}
