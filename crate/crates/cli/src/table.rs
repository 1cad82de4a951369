//! Tabular output as CSV or JSON.

use serde_json::{json, Map, Value};
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// 17 significant digits, `.` as decimal separator.
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

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results reported next to the rows.
    pub summary: Map<String, Value>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Table {
            command,
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.into(), v.into());
    }

    /// Header, rows, then one `# key = value` line per summary entry.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt_num(*x),
                    Cell::Text(s) => csv_field(s),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        for (k, v) in &self.summary {
            let v = match v {
                Value::Number(n) if n.is_f64() => n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (name, c) in self.columns.iter().zip(row) {
                    let v = match c {
                        Cell::Num(x) => num_value(*x),
                        Cell::Text(s) => json!(s),
                        Cell::Bool(b) => json!(b),
                        Cell::Empty => Value::Null,
                    };
                    m.insert((*name).into(), v);
                }
                Value::Object(m)
            })
            .collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "columns": self.columns,
            "rows": rows,
            "summary": self.summary,
        })
    }
}

/// Non-finite values become strings, since JSON has no literal for them.
pub fn num_value(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(fmt_num(x)))
}
