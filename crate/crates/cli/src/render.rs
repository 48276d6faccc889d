//! Format-independent tables and their csv, json and markdown renderings.
//!
//! Rounding happens only in markdown. csv and json carry every value at full
//! precision, and a score/rank cell becomes two fields there.

use std::fmt::Write;

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    /// Real with the number of decimals markdown shows.
    Real(f64, usize),
    /// Efficiency score with its rank; markdown shows `0.49/6`.
    Scored(f64, usize),
    /// Percentage; markdown shows one decimal and a bare `0` below 0.05.
    Rate(f64),
    Empty,
}

impl Cell {
    fn numeric(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => render_json(&self.to_json()),
            Format::Md => self.to_md(),
        }
    }

    /// A column holds a score/rank pair if any of its cells does.
    fn scored_columns(&self) -> Vec<bool> {
        (0..self.headers.len())
            .map(|j| self.rows.iter().any(|r| matches!(r[j], Cell::Scored(..))))
            .collect()
    }

    fn flat_headers(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (h, scored) in self.headers.iter().zip(self.scored_columns()) {
            out.push(h.clone());
            if scored {
                out.push(format!("{h} rank"));
            }
        }
        out
    }

    /// Cells expanded to machine fields: one per header, two per scored column.
    fn flat_rows(&self) -> Vec<Vec<Value>> {
        let scored = self.scored_columns();
        self.rows
            .iter()
            .map(|row| {
                let mut out = Vec::new();
                for (cell, &s) in row.iter().zip(&scored) {
                    match cell {
                        Cell::Scored(v, r) => {
                            out.push(number(*v));
                            out.push(Value::from(*r as u64));
                        }
                        other => {
                            out.push(match other {
                                Cell::Text(t) => Value::String(t.clone()),
                                Cell::Int(i) => Value::from(*i),
                                Cell::Real(v, _) | Cell::Rate(v) => number(*v),
                                _ => Value::Null,
                            });
                            if s {
                                out.push(Value::Null);
                            }
                        }
                    }
                }
                out
            })
            .collect()
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.flat_headers()).expect("in-memory write");
        for row in self.flat_rows() {
            let fields: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    Value::Number(n) => match n.as_f64() {
                        Some(f) if !n.is_u64() => f.to_string(),
                        _ => n.to_string(),
                    },
                    other => other.to_string(),
                })
                .collect();
            w.write_record(&fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_json(&self) -> Value {
        let headers = self.flat_headers();
        Value::Array(
            self.flat_rows()
                .into_iter()
                .map(|row| Value::Object(headers.iter().cloned().zip(row).collect::<Map<_, _>>()))
                .collect(),
        )
    }

    fn to_md(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(md_cell).collect()).collect();
        let right: Vec<bool> = (0..self.headers.len())
            .map(|j| self.rows.iter().any(|r| r[j].numeric()) && self.rows.iter().all(|r| r[j].numeric()))
            .collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].chars().count())
                    .chain([self.headers[j].chars().count(), 3])
                    .max()
                    .unwrap_or(3)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, fields: &[String]| {
            out.push('|');
            for (j, f) in fields.iter().enumerate() {
                let pad = widths[j] - f.chars().count();
                if right[j] {
                    let _ = write!(out, " {}{} |", " ".repeat(pad), f);
                } else {
                    let _ = write!(out, " {}{} |", f, " ".repeat(pad));
                }
            }
            out.push('\n');
        };
        line(&mut out, &self.headers);
        out.push('|');
        for (w, &r) in widths.iter().zip(&right) {
            if r {
                let _ = write!(out, " {}: |", "-".repeat(w - 1));
            } else {
                let _ = write!(out, " {} |", "-".repeat(*w));
            }
        }
        out.push('\n');
        for row in &cells {
            line(&mut out, row);
        }
        out
    }
}

fn number(v: f64) -> Value {
    Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn md_cell(c: &Cell) -> String {
    match c {
        Cell::Text(t) => t.replace('|', "\\|"),
        Cell::Int(i) => i.to_string(),
        Cell::Real(v, d) => format!("{v:.d$}"),
        Cell::Scored(v, r) => format!("{v:.2}/{r}"),
        Cell::Rate(v) if v.abs() < 0.05 => "0".into(),
        Cell::Rate(v) => format!("{v:.1}"),
        Cell::Empty => String::new(),
    }
}

/// Pretty-printed json with a trailing newline. Rendering a reparsed
/// document yields the same bytes.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}
