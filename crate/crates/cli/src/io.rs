//! CSV ingestion for datasets and synthesis specs.
//!
//! Dataset files carry a `dmu` column followed by `<role>:<name>` columns,
//! e.g. `in:Berths` or `out-:Waste water`. Coordinates in errors are 1-based
//! file lines and columns, header included.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use dea_core::dataset::ViolationKind;
use dea_core::{Dataset, DatasetError, Indicator, Role, StatsRow};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed header at column {column}: {reason}")]
    Header { column: usize, reason: String },
    #[error("line {line}, column {column}: {reason}")]
    Cell { line: usize, column: usize, reason: String },
    #[error("{0}")]
    Invalid(String),
}

pub struct Loaded {
    pub dataset: Dataset,
    /// Human-readable notes about epsilon-shifted cells.
    pub warnings: Vec<String>,
}

pub fn open(path: &Path) -> Result<File, LoadError> {
    File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => LoadError::NotFound(path.display().to_string()),
        _ => LoadError::Io {
            path: path.display().to_string(),
            source: e,
        },
    })
}

fn parse_number(cell: &str, line: usize, column: usize) -> Result<f64, LoadError> {
    let t = cell.trim();
    t.parse::<f64>().map_err(|_| LoadError::Cell {
        line,
        column,
        reason: format!("non-numeric value `{t}`"),
    })
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).from_reader(source)
}

/// Parses a dataset file. Zeros in model columns are rejected unless
/// `epsilon_shift` is set, in which case each one is replaced and reported.
pub fn load_csv<R: Read>(source: R, epsilon_shift: bool) -> Result<Loaded, LoadError> {
    let mut records = reader(source).into_records();
    let header = match records.next() {
        Some(h) => h?,
        None => {
            return Err(LoadError::Header {
                column: 1,
                reason: "empty file".into(),
            })
        }
    };
    if header.get(0).map(str::trim) != Some("dmu") {
        return Err(LoadError::Header {
            column: 1,
            reason: "first column must be `dmu`".into(),
        });
    }
    let mut indicators = Vec::with_capacity(header.len() - 1);
    for (j, h) in header.iter().enumerate().skip(1) {
        let (tag, name) = h.split_once(':').ok_or_else(|| LoadError::Header {
            column: j + 1,
            reason: format!("`{h}` is not `<role>:<name>`"),
        })?;
        let role = Role::from_tag(tag.trim()).ok_or_else(|| LoadError::Header {
            column: j + 1,
            reason: format!("unknown role `{tag}`; expected in, out+, out- or meta"),
        })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(LoadError::Header {
                column: j + 1,
                reason: "empty indicator name".into(),
            });
        }
        if indicators.iter().any(|i: &Indicator| i.name == name) {
            return Err(LoadError::Header {
                column: j + 1,
                reason: format!("duplicate indicator `{name}`"),
            });
        }
        indicators.push(Indicator::new(name, role));
    }

    let mut names = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let line = i + 2;
        let name = rec.get(0).unwrap_or("").trim().to_string();
        if let Some(first) = names.iter().position(|n| n == &name) {
            return Err(LoadError::Cell {
                line,
                column: 1,
                reason: format!("duplicate dmu `{name}` (first on line {})", first + 2),
            });
        }
        let row = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, cell)| parse_number(cell, line, j + 1))
            .collect::<Result<Vec<_>, _>>()?;
        names.push(name);
        rows.push(row);
    }

    let mut dataset = Dataset::from_raw(names, indicators, rows);
    let mut warnings = Vec::new();
    if epsilon_shift {
        let (shifted, shifts) = dataset.epsilon_shift();
        dataset = shifted;
        warnings = shifts
            .iter()
            .map(|w| {
                format!(
                    "line {}, column {}: zero replaced by {:e}",
                    w.row + 2,
                    w.column + 2,
                    w.replacement
                )
            })
            .collect();
    }
    match dataset.validate().first() {
        None => Ok(Loaded { dataset, warnings }),
        Some(v) => Err(match (v.row, v.column) {
            (Some(r), Some(c)) => LoadError::Cell {
                line: r + 2,
                column: c + 2,
                reason: v.kind.message().into(),
            },
            (Some(r), None) if v.kind != ViolationKind::ShapeMismatch => LoadError::Cell {
                line: r + 2,
                column: 1,
                reason: v.kind.message().into(),
            },
            _ => LoadError::Invalid(v.to_string()),
        }),
    }
}

pub fn load_csv_path(path: &Path, epsilon_shift: bool) -> Result<Loaded, LoadError> {
    load_csv(open(path)?, epsilon_shift)
}

const SPEC_HEADER: [&str; 6] = ["name", "role", "min", "max", "mean", "sd"];

/// Parses a synthesis spec: header `name,role,min,max,mean,sd`, one
/// indicator per line, roles as in dataset headers.
pub fn load_stats_spec<R: Read>(source: R) -> Result<Vec<StatsRow>, LoadError> {
    let mut records = reader(source).into_records();
    let header = match records.next() {
        Some(h) => h?,
        None => {
            return Err(LoadError::Header {
                column: 1,
                reason: "empty file".into(),
            })
        }
    };
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != SPEC_HEADER {
        return Err(LoadError::Header {
            column: 1,
            reason: format!("expected `{}`", SPEC_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let line = i + 2;
        let role = Role::from_tag(rec[1].trim()).ok_or_else(|| LoadError::Cell {
            line,
            column: 2,
            reason: format!("unknown role `{}`", &rec[1]),
        })?;
        let num = |j: usize| parse_number(&rec[j], line, j + 1);
        out.push(StatsRow {
            indicator: rec[0].trim().to_string(),
            role,
            min: num(2)?,
            max: num(3)?,
            mean: num(4)?,
            sd: num(5)?,
        });
    }
    Ok(out)
}

pub fn load_stats_spec_path(path: &Path) -> Result<Vec<StatsRow>, LoadError> {
    load_stats_spec(open(path)?)
}

/// Writes `d` in the dataset file format. Values use the shortest decimal
/// form that parses back to the same bits, so load/save round-trips exactly.
pub fn write_dataset_csv(d: &Dataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dmu".to_string()];
    header.extend(d.indicators().iter().map(|i| format!("{}:{}", i.role.tag(), i.name)));
    w.write_record(&header).expect("in-memory write");
    for (name, row) in d.dmu_names().iter().zip(d.rows()) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of utf-8 fields")
}

impl From<DatasetError> for LoadError {
    fn from(e: DatasetError) -> Self {
        LoadError::Invalid(e.to_string())
    }
}
