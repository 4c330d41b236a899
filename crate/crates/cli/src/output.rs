//! Tabular output as commented CSV or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;

pub const EQUATION_SET: &str = "point-dipole-pair-vacuum/single-oscillator/closed-form-kernels";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".into()
    }
}

pub struct Table {
    pub command: &'static str,
    pub config_hash: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, config_hash: String, columns: &[&'static str]) -> Self {
        Self {
            command,
            config_hash,
            meta: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("tool".to_string(), format!("heatflux {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), self.command.to_string()),
            ("equations".to_string(), EQUATION_SET.to_string()),
            ("config_sha256".to_string(), self.config_hash.clone()),
        ];
        h.extend(self.meta.iter().cloned());
        h
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (k, v) in self.header() {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_num(*v),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut header = Map::new();
        for (k, v) in self.header() {
            header.insert(k, Value::String(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Array(
                    r.iter()
                        .map(|c| match c {
                            // Non-finite values have no JSON number form.
                            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                            Cell::Text(s) => Value::String(s.clone()),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = json!({ "header": header, "columns": self.columns, "rows": rows });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [1.0 / 3.0, 1.1482e34, -2.5e-300, 6.02214076e23] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn csv_has_header_comment() {
        let mut t = Table::new("test", "abc".into(), &["x", "label"]);
        t.push(vec![0.5.into(), "a".into()]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Csv).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("# config_sha256: abc\n"));
        assert!(s.ends_with("x,label\n5.0000000000000000e-1,a\n"));
    }

    #[test]
    fn json_maps_nan_to_null() {
        let mut t = Table::new("test", "abc".into(), &["x"]);
        t.push(vec![f64::NAN.into()]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Json).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["rows"][0][0], Value::Null);
        assert_eq!(v["header"]["equations"], EQUATION_SET);
    }
}
