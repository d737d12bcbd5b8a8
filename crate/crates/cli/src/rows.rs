//! Result rows and their CSV/JSON serializations.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

pub const CSV_HEADER: [&str; 8] = [
    "scenario", "engine", "theta", "zeta", "i_port1", "i_port2", "r_norm", "extra",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub engine: String,
    pub theta: Option<f64>,
    pub zeta: Option<f64>,
    pub i_port1: f64,
    pub i_port2: f64,
    pub r_norm: f64,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

impl ResultRow {
    pub fn new(scenario: &str, engine: &str, theta: Option<f64>, zeta: Option<f64>) -> Self {
        ResultRow {
            scenario: scenario.to_string(),
            engine: engine.to_string(),
            theta,
            zeta,
            i_port1: 0.0,
            i_port2: 0.0,
            r_norm: 0.0,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_values(mut self, i1: f64, i2: f64, r: f64) -> Self {
        self.i_port1 = i1;
        self.i_port2 = i2;
        self.r_norm = r;
        self
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no rows to write")]
    Empty,
    #[error("row {row}: field {field} is not finite ({value})")]
    NonFinite {
        row: usize,
        field: &'static str,
        value: f64,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn check_finite(rows: &[ResultRow]) -> Result<(), EmitError> {
    for (row, r) in rows.iter().enumerate() {
        let fields = [
            ("theta", r.theta.unwrap_or(0.0)),
            ("zeta", r.zeta.unwrap_or(0.0)),
            ("i_port1", r.i_port1),
            ("i_port2", r.i_port2),
            ("r_norm", r.r_norm),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(EmitError::NonFinite { row, field, value });
            }
        }
    }
    Ok(())
}

fn extra_json(extra: &BTreeMap<String, String>) -> Result<String, EmitError> {
    serde_json::to_string(extra).map_err(|e| EmitError::Serialize(e.to_string()))
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String, EmitError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| EmitError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.engine.clone(),
            fmt_opt(r.theta),
            fmt_opt(r.zeta),
            fmt_float(r.i_port1),
            fmt_float(r.i_port2),
            fmt_float(r.r_norm),
            extra_json(&r.extra)?,
        ])
        .map_err(ser)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| EmitError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| EmitError::Serialize(e.to_string()))
}

#[derive(Serialize)]
struct JsonRow<'a> {
    scenario: &'a str,
    engine: &'a str,
    theta: Option<Box<RawValue>>,
    zeta: Option<Box<RawValue>>,
    i_port1: Box<RawValue>,
    i_port2: Box<RawValue>,
    r_norm: Box<RawValue>,
    extra: &'a BTreeMap<String, String>,
}

fn raw(x: f64) -> Result<Box<RawValue>, EmitError> {
    RawValue::from_string(fmt_float(x)).map_err(|e| EmitError::Serialize(e.to_string()))
}

pub fn to_json(rows: &[ResultRow]) -> Result<String, EmitError> {
    let json_rows = rows
        .iter()
        .map(|r| {
            Ok(JsonRow {
                scenario: &r.scenario,
                engine: &r.engine,
                theta: r.theta.map(raw).transpose()?,
                zeta: r.zeta.map(raw).transpose()?,
                i_port1: raw(r.i_port1)?,
                i_port2: raw(r.i_port2)?,
                r_norm: raw(r.r_norm)?,
                extra: &r.extra,
            })
        })
        .collect::<Result<Vec<_>, EmitError>>()?;
    let mut text = serde_json::to_string_pretty(&json_rows)
        .map_err(|e| EmitError::Serialize(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<String, EmitError> {
    if rows.is_empty() {
        return Err(EmitError::Empty);
    }
    check_finite(rows)?;
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

/// Writes rows to `path`, or to `stdout` when `path` is `None`.
///
/// Files are written to a temporary sibling and renamed into place, so a
/// failure never leaves a partial file behind.
pub fn emit(
    rows: &[ResultRow],
    format: Format,
    path: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), EmitError> {
    let text = render(rows, format)?;
    let Some(path) = path else {
        return stdout
            .write_all(text.as_bytes())
            .map_err(|source| EmitError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            });
    };
    let io = |source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Reads rows back from a JSON emission.
pub fn parse_json(text: &str) -> Result<Vec<ResultRow>, serde_json::Error> {
    serde_json::from_str(text)
}

/// Reads rows back from a CSV emission.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, Box<dyn std::error::Error>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(format!("unexpected header {header:?}").into());
    }
    let opt = |s: &str| -> Result<Option<f64>, std::num::ParseFloatError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some)
        }
    };
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        rows.push(ResultRow {
            scenario: rec[0].to_string(),
            engine: rec[1].to_string(),
            theta: opt(&rec[2])?,
            zeta: opt(&rec[3])?,
            i_port1: rec[4].parse()?,
            i_port2: rec[5].parse()?,
            r_norm: rec[6].parse()?,
            extra: serde_json::from_str(&rec[7])?,
        });
    }
    Ok(rows)
}
