use std::fmt;

use serde_json::{json, Value};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// What a command produced. `ok` decides the exit code.
pub struct Report {
    /// One of `audit`, `evaluation`, `run`, `certificate`, `cb-report`.
    pub kind: &'static str,
    pub command: &'static str,
    pub input: Value,
    pub payload: Value,
    pub table: Table,
    pub ok: bool,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    // serde_json maps are ordered by key, which fixes the field order
    pub fn to_json(&self) -> String {
        let v = json!({
            "kind": self.kind,
            "command": self.command,
            "format_version": FORMAT_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "input": self.input,
            "payload": self.payload,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, Failure> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Failure::Io(e.to_string());
        w.write_record(&self.table.header).map_err(io)?;
        for row in &self.table.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Flags that parse but do not fit together; exit code 2.
    Usage(String),
    /// Errors raised by the library; exit code 1.
    Domain(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) | Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Domain(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

pub fn domain<E: fmt::Display>(e: E) -> Failure {
    Failure::Domain(e.to_string())
}

pub fn opt<T: fmt::Display>(x: &Option<T>) -> Value {
    x.as_ref().map_or(Value::Null, |v| Value::String(v.to_string()))
}

pub fn strings<T: fmt::Display>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn cell<T: fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(String::new, |v| v.to_string())
}
