//! Tabular results rendered as CSV or JSON.
//!
//! Every output embeds the command name and the resolved config. Floats are
//! written with 17 significant digits in CSV and as shortest round-trip
//! numbers in JSON; non-finite values become `NaN`/`inf` in CSV and `null` in
//! JSON.

use charpoly_core::detmc::SignedLog;
use serde_json::{json, Value as Json};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i8> for Cell {
    fn from(v: i8) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => "NaN".into(),
            Cell::Float(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Null => Json::Null,
            Cell::Str(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// Sign, log-magnitude and a best-effort linear value of a signed-log number.
pub fn signed_log_cells(x: SignedLog) -> [Cell; 3] {
    [
        Cell::from(x.sign()),
        Cell::from(x.logmag()),
        Cell::from(x.to_f64_checked()),
    ]
}

#[derive(Clone, Debug)]
pub struct Table {
    pub command: String,
    pub config: Json,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// `Some(passed)` for check suites.
    pub passed: Option<bool>,
}

impl Table {
    pub fn new(command: &str, config: Json, columns: &[&str]) -> Self {
        Self {
            command: command.into(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            passed: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# command: {}\n# config: {}\n", self.command, self.config);
        if let Some(p) = self.passed {
            out.push_str(&format!("# passed: {p}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 cells"));
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|r| Json::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let mut doc = json!({
            "command": self.command,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
        });
        if let Some(p) = self.passed {
            doc["passed"] = json!(p);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("json serializes");
        s.push('\n');
        s
    }
}
