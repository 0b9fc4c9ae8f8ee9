//! Plot-ready output: CSV and JSON with stable formatting.
//!
//! Every float is serialized in scientific notation with 17 significant
//! digits, which round-trips `f64` exactly, and fields keep a fixed
//! order, so repeated runs diff cleanly. CSV files start with a single
//! `#`-prefixed metadata line followed by a header row; JSON output is
//! one object per record.

use crate::{Error, Result};
use serde::Serialize;
use std::io::Write;
use std::str::FromStr;

/// Output encodings supported by the command-line surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Domain(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// `f64` to scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One cell of a tabular record.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => json_escape(s),
        }
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// A tabular output record: ordered metadata, a header, and rows.
#[derive(Debug, Clone)]
pub struct Table {
    /// The producing subcommand.
    pub command: &'static str,
    /// Ordered key/value metadata (parameters, method, seed, ...).
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Table { command, meta: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a leading `# key=value ...` metadata comment, a header
    /// row, and `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# command=");
        out.push_str(self.command);
        for (k, v) in &self.meta {
            out.push(' ');
            out.push_str(k);
            out.push('=');
            out.push_str(v);
        }
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// A single JSON object with `command`, `meta`, `columns` and `rows`,
    /// fields in that order.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"command\":");
        out.push_str(&json_escape(self.command));
        out.push_str(",\"meta\":{");
        for (i, (k, v)) in self.meta.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&json_escape(k));
            out.push(':');
            out.push_str(&json_escape(v));
        }
        out.push_str("},\"columns\":[");
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&json_escape(c));
        }
        out.push_str("],\"rows\":[");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&cell.json());
            }
            out.push(']');
        }
        out.push_str("]}\n");
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Serializes any `Serialize` value to JSON with all floats in
/// 17-significant-digit scientific notation (used for the validation
/// records, one object per line).
pub fn to_json_value<T: Serialize>(value: &T) -> String {
    struct SciFormatter;
    impl serde_json::ser::Formatter for SciFormatter {
        fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
        where
            W: ?Sized + Write,
        {
            write!(writer, "{}", format_float(value))
        }
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser).expect("serialization cannot fail for plain records");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

/// Parsed CSV content: metadata pairs, column names, numeric rows.
pub type ParsedCsv = (Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>);

/// Parses a [`Table`] CSV back into (meta, columns, numeric rows); used by
/// the round-trip checks.
pub fn parse_table_csv(text: &str) -> Result<ParsedCsv> {
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .ok_or_else(|| Error::Domain("empty CSV".into()))?
        .strip_prefix("# ")
        .ok_or_else(|| Error::Domain("missing metadata comment".into()))?;
    let meta: Vec<(String, String)> = meta_line
        .split(' ')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Domain("missing header".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| Error::Domain(format!("bad CSV number: {e}")))?);
    }
    Ok((meta, columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("marginal", vec!["n", "f_lo", "neglog10"])
            .meta("r", format_float(0.9))
            .meta("nu", format_float(0.5))
            .meta("method", "ri");
        t.push(vec![Cell::Int(0), Cell::Float(0.1383673), Cell::Float(0.858_931_231_4)]);
        t.push(vec![Cell::Int(1), Cell::Float(5.551115123125783e-17), Cell::Float(16.25)]);
        t
    }

    #[test]
    fn float_formatting_has_17_digits_and_roundtrips() {
        let cases = [0.1, 2.0 / 3.0, 1e-300, 123456.789, f64::MIN_POSITIVE];
        for &x in &cases {
            let s = format_float(x);
            assert!(s.contains('e'));
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "17 significant digits must round-trip: {s}");
        }
    }

    #[test]
    fn csv_and_json_agree_to_all_digits() {
        let t = sample();
        let (meta, cols, rows) = parse_table_csv(&t.to_csv()).unwrap();
        assert_eq!(meta[1], ("r".to_string(), format_float(0.9)));
        assert_eq!(cols, vec!["n", "f_lo", "neglog10"]);
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        let jrows = json["rows"].as_array().unwrap();
        assert_eq!(jrows.len(), rows.len());
        for (csv_row, json_row) in rows.iter().zip(jrows) {
            for (a, b) in csv_row.iter().zip(json_row.as_array().unwrap()) {
                // Both sides re-parse to bit-identical doubles.
                assert_eq!(*a, b.as_f64().unwrap());
            }
        }
        assert_eq!(json["command"], "marginal");
        assert_eq!(json["meta"]["method"], "ri");
    }

    #[test]
    fn csv_is_deterministic_and_newline_terminated() {
        let t = sample();
        assert_eq!(t.to_csv(), t.to_csv());
        assert!(t.to_csv().starts_with("# command=marginal r="));
        assert!(t.to_csv().ends_with('\n'));
        assert!(!t.to_csv().contains("\r\n"));
    }

    #[test]
    fn json_records_format_floats_scientifically() {
        #[derive(Serialize)]
        struct Rec {
            xi: f64,
            passed: bool,
        }
        let s = to_json_value(&Rec { xi: 9.3279, passed: true });
        // 17 significant digits of the stored double, not of the literal.
        assert_eq!(s, "{\"xi\":9.3278999999999996e0,\"passed\":true}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["xi"].as_f64().unwrap(), 9.3279);
    }

    #[test]
    fn format_parse_errors() {
        assert!("csv".parse::<OutputFormat>().is_ok());
        assert!("yaml".parse::<OutputFormat>().is_err());
    }
}
