//! Single emission path for every subcommand, so byte-determinism is
//! enforced in one place. A [`Document`] is the resolved run: echoed
//! configuration, column names, rows of cells, and the optional verdict
//! and timing stamp.
//!
//! Floats print in Rust's shortest round-trip form in both formats, so
//! CSV output re-parses to the identical bit pattern.

use std::fmt::Write as _;

use serde_json::{json, Map, Number, Value};

/// One table cell / config entry.
#[derive(Debug, Clone)]
pub enum Cell {
    UInt(u64),
    /// Raw tuple counts can exceed u64; JSON stays a number while the
    /// value fits, and falls back to a decimal string beyond that.
    BigUInt(u128),
    Float(f64),
    Text(String),
    FloatList(Vec<f64>),
    UIntList(Vec<u64>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::BigUInt(v) => v.to_string(),
            Cell::Float(v) => format!("{v}"),
            Cell::Text(v) => v.clone(),
            Cell::FloatList(vs) => vs
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(","),
            Cell::UIntList(vs) => vs
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    fn jsonify(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::BigUInt(v) => u64::try_from(*v)
                .map(|small| json!(small))
                .unwrap_or_else(|_| json!(v.to_string())),
            Cell::Float(v) => Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or_else(|| json!(v.to_string())),
            Cell::Text(v) => json!(v),
            Cell::FloatList(vs) => json!(vs),
            Cell::UIntList(vs) => json!(vs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A fully resolved run ready to serialize.
#[derive(Debug)]
pub struct Document {
    pub command: &'static str,
    /// Echoed configuration in emission order.
    pub config: Vec<(&'static str, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub verdict: Option<&'static str>,
    pub timing_ms: Option<u128>,
    /// Emit CSV rows without a header line (point dumps stay loadable as
    /// plain one-value-per-line files).
    pub headerless_csv: bool,
}

impl Document {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            config: Vec::new(),
            columns,
            rows: Vec::new(),
            verdict: None,
            timing_ms: None,
            headerless_csv: false,
        }
    }

    pub fn config(&mut self, key: &'static str, value: Cell) -> &mut Self {
        self.config.push((key, value));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command={}", self.command);
        for (key, value) in &self.config {
            let _ = writeln!(out, "# {key}={}", value.csv());
        }
        if let Some(ms) = self.timing_ms {
            let _ = writeln!(out, "# timing_ms={ms}");
        }
        if let Some(verdict) = self.verdict {
            let _ = writeln!(out, "# verdict={verdict}");
        }
        if !self.headerless_csv {
            let _ = writeln!(out, "{}", self.columns.join(","));
        }
        for row in &self.rows {
            let line = row.iter().map(Cell::csv).collect::<Vec<_>>().join(",");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    fn render_json(&self) -> String {
        let mut root = Map::new();
        root.insert("command".into(), json!(self.command));
        let mut config = Map::new();
        for (key, value) in &self.config {
            config.insert((*key).into(), value.jsonify());
        }
        root.insert("config".into(), Value::Object(config));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert((*name).into(), cell.jsonify());
                }
                Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), json!(rows));
        if let Some(verdict) = self.verdict {
            root.insert("verdict".into(), json!(verdict));
        }
        if let Some(ms) = self.timing_ms {
            root.insert("timing_ms".into(), json!(ms as u64));
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(root))
            .expect("document serialization cannot fail");
        text.push('\n');
        text
    }
}
