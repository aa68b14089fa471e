//! Tabular reports and their CSV, JSON and text renderings.
//!
//! Every float is rounded once, to [`SIGNIFICANT_DIGITS`] significant
//! digits, before it reaches any renderer, so all formats carry the same
//! numbers.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Deserialize;
use serde_json::{json, Map, Value as Json};

pub const SIGNIFICANT_DIGITS: usize = 10;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Text,
}

/// Rounds to the reporting precision. Non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text that parses back to the rounded value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = round_sig(x);
    let a = x.abs();
    if x == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// JSON number for a float; non-finite values become `null`.
pub fn json_number(x: f64) -> Json {
    serde_json::Number::from_f64(round_sig(x)).map_or(Json::Null, Json::Number)
}

pub fn json_numbers(xs: &[f64]) -> Json {
    Json::Array(xs.iter().map(|&x| json_number(x)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_text(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Num(x) => json_number(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }
}

/// Output of one command: metadata plus named tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    /// Extra JSON-only fields, in insertion order.
    pub meta: Vec<(String, Json)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            meta: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: Json) {
        self.meta.push((key.into(), value));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json_string(),
            Format::Text => self.to_text(),
        }
    }

    /// Tables in order, separated by a blank line, each with its header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::to_text)).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        }
        out
    }

    pub fn to_json(&self) -> Json {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
        obj.insert("command".into(), json!(self.command));
        for (k, v) in &self.meta {
            obj.insert(k.clone(), v.clone());
        }
        for table in &self.tables {
            let rows = table
                .rows
                .iter()
                .map(|row| {
                    let mut r = Map::new();
                    for (c, cell) in table.columns.iter().zip(row) {
                        r.insert(c.clone(), cell.to_json());
                    }
                    Json::Object(r)
                })
                .collect();
            obj.insert(table.name.clone(), Json::Array(rows));
        }
        Json::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    /// Aligned columns for reading in a terminal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "# {}", table.name);
            let cells: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::to_text).collect())
                .collect();
            let widths: Vec<usize> = (0..table.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].len())
                        .chain([table.columns[j].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |row: &[String]| {
                row.iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "{}", line(&table.columns));
            for row in &cells {
                let _ = writeln!(out, "{}", line(row));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_ten_digits() {
        assert_eq!(round_sig(875.015639123456), 875.0156391);
        assert_eq!(round_sig(-1.23456789012e-7), -1.234567890e-7);
        assert_eq!(round_sig(0.0), 0.0);
        assert!(round_sig(f64::NAN).is_nan());
    }

    #[test]
    fn number_text_round_trips() {
        for x in [1.0, 0.1, 222620.7143, 1e-9, 3.5e20, -42.0, 0.00001] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), round_sig(x), "{s}");
        }
        assert_eq!(format_number(1e-9), "1e-9");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn json_null_for_non_finite() {
        assert_eq!(json_number(f64::NAN), Json::Null);
        assert_eq!(json_number(2.0), json!(2.0));
    }

    fn sample() -> Report {
        let mut r = Report::new("demo");
        r.meta("seed", json!(3));
        let mut t = Table::new("rows", &["name", "x", "ok"]);
        t.push(vec!["a".into(), 1.25.into(), true.into()]);
        t.push(vec!["b,c".into(), f64::NAN.into(), false.into()]);
        r.tables.push(t);
        r
    }

    #[test]
    fn csv_quotes_and_formats() {
        assert_eq!(sample().to_csv(), "name,x,ok\na,1.25,true\n\"b,c\",NaN,false\n");
    }

    #[test]
    fn json_layout() {
        let j = sample().to_json();
        assert_eq!(j["schema_version"], 1);
        assert_eq!(j["command"], "demo");
        assert_eq!(j["seed"], 3);
        assert_eq!(j["rows"][0]["x"], 1.25);
        assert_eq!(j["rows"][1]["x"], Json::Null);
    }

    #[test]
    fn text_is_aligned() {
        let t = sample().to_text();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "# rows");
        assert_eq!(lines[1].len(), lines[2].len());
    }

    proptest::proptest! {
        #[test]
        fn text_and_json_agree(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let text: f64 = format_number(x).parse().unwrap();
            proptest::prop_assert_eq!(text, round_sig(x));
            proptest::prop_assert_eq!(json_number(x).as_f64().unwrap(), text);
            proptest::prop_assert_eq!(round_sig(text), text);
        }
    }

    #[test]
    fn multiple_tables_are_separated() {
        let mut r = sample();
        let mut t = Table::new("more", &["k"]);
        t.push(vec![1usize.into()]);
        r.tables.push(t);
        assert!(r.to_csv().ends_with("\n\nk\n1\n"));
    }
}
