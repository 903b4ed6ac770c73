//! Output tables. CSV carries the parameter block as `# key = value` lines
//! above the header; JSON nests it under `"parameters"`.

use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(u64::from(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
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

/// 17 significant digits, enough to read back the same double.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub command: String,
    /// Inputs, in the order they are printed.
    pub parameters: Vec<(String, Cell)>,
    /// Derived scalars that do not fit the rows.
    pub summary: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.parameters.push((key.to_string(), value.into()));
        self
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.summary.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)?;
                Ok(())
            }
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "# command = {}", self.command)?;
        for (k, v) in &self.parameters {
            writeln!(out, "# {k} = {}", cell_text(v))?;
        }
        for (k, v) in &self.summary {
            writeln!(out, "# summary.{k} = {}", cell_text(v))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        w.flush().context("writing CSV")?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let obj = |pairs: &[(String, Cell)]| {
            let mut m = Map::new();
            for (k, v) in pairs {
                m.insert(k.clone(), cell_json(v));
            }
            Value::Object(m)
        };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(cell_json).collect()))
            .collect();
        json!({
            "schema_version": 1,
            "command": self.command,
            "parameters": obj(&self.parameters),
            "summary": obj(&self.summary),
            "columns": self.columns,
            "rows": rows,
        })
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_num(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

/// Non-finite numbers become strings, since JSON has no literal for them.
fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) if x.is_finite() => json!(x),
        Cell::Int(i) => json!(i),
        _ => Value::String(cell_text(c)),
    }
}
