//! Frame and matrix files, and the JSON report format.
//!
//! CSV frames hold one vector per line with comma-separated coordinates;
//! blank lines and lines starting with `#` are skipped. JSON frames are
//! objects `{"dim": n, "vectors": [[...], ...], "labels": [...]}` with
//! optional labels.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::piecewise::PiecewiseScaling;
use crate::projection::OrthogonalProjection;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Csv,
    Json,
}

impl FileFormat {
    /// `.json` means JSON; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => FileFormat::Json,
            _ => FileFormat::Csv,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameJson {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

pub fn load_frame(path: &Path, format: Option<FileFormat>) -> Result<Frame> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    match format.unwrap_or_else(|| FileFormat::from_path(path)) {
        FileFormat::Csv => parse_csv_frame(&text, &name),
        FileFormat::Json => parse_json_frame(&text, &name),
    }
}

/// Parses comma-separated rows into a rectangular table, with line and
/// column diagnostics.
pub fn parse_csv_rows(text: &str, name: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, tok)| {
                let tok = tok.trim();
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    path: name.to_string(),
                    line: lineno,
                    column: col + 1,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    path: name.to_string(),
                    line: lineno,
                    column: row.len().min(first.len()) + 1,
                    message: format!("ragged row: {} fields, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format { path: name.to_string(), message: "no data rows".into() });
    }
    Ok(rows)
}

pub fn parse_csv_frame(text: &str, name: &str) -> Result<Frame> {
    let rows = parse_csv_rows(text, name)?;
    Frame::from_rows(&rows).map_err(|e| Error::Format { path: name.to_string(), message: e.to_string() })
}

pub fn parse_json_frame(text: &str, name: &str) -> Result<Frame> {
    let parsed: FrameJson = serde_json::from_str(text).map_err(|e| json_error(e, name))?;
    if parsed.vectors.is_empty() {
        return Err(Error::Format { path: name.to_string(), message: "no vectors".into() });
    }
    if let Some((i, v)) = parsed.vectors.iter().enumerate().find(|(_, v)| v.len() != parsed.dim) {
        return Err(Error::Format {
            path: name.to_string(),
            message: format!("vector {i} has {} coordinates, dim is {}", v.len(), parsed.dim),
        });
    }
    let frame = Frame::from_rows(&parsed.vectors).map_err(|e| Error::Format { path: name.to_string(), message: e.to_string() })?;
    match parsed.labels {
        Some(labels) => frame.with_labels(labels).map_err(|e| Error::Format { path: name.to_string(), message: e.to_string() }),
        None => Ok(frame),
    }
}

fn json_error(e: serde_json::Error, name: &str) -> Error {
    Error::Parse { path: name.to_string(), line: e.line(), column: e.column(), message: e.to_string() }
}

pub fn frame_to_csv(frame: &Frame) -> String {
    let mut out = String::new();
    for row in frame.to_rows() {
        let fields: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn frame_to_json(frame: &Frame) -> String {
    let doc = FrameJson { dim: frame.dim(), vectors: frame.to_rows(), labels: frame.labels().map(|l| l.to_vec()) };
    serde_json::to_string_pretty(&doc).expect("frames serialize") + "\n"
}

pub fn save_frame(frame: &Frame, path: &Path, format: Option<FileFormat>) -> Result<()> {
    let text = match format.unwrap_or_else(|| FileFormat::from_path(path)) {
        FileFormat::Csv => frame_to_csv(frame),
        FileFormat::Json => frame_to_json(frame),
    };
    fs::write(path, text)?;
    Ok(())
}

/// Shortest decimal that round-trips to the same binary64 value.
fn format_float(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Rows(Vec<Vec<f64>>),
    Wrapped {
        #[serde(alias = "projection", alias = "unitary")]
        matrix: Vec<Vec<f64>>,
    },
}

/// A dense matrix, row-major: CSV rows, a JSON array of rows, or a JSON
/// object with a `matrix` (or `projection` / `unitary`) field.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let rows = match FileFormat::from_path(path) {
        FileFormat::Csv => parse_csv_rows(&text, &name)?,
        FileFormat::Json => match serde_json::from_str::<MatrixJson>(&text).map_err(|e| json_error(e, &name))? {
            MatrixJson::Rows(r) | MatrixJson::Wrapped { matrix: r } => r,
        },
    };
    rows_to_matrix(&rows).map_err(|message| Error::Format { path: name, message })
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> std::result::Result<DMatrix<f64>, String> {
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || ncols == 0 {
        return Err("empty matrix".into());
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.iter().flatten().copied()))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Serialized scaling: either `{"projection", "a", "b"}` or `{"c"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalingRecord {
    Piecewise { projection: Vec<Vec<f64>>, a: Vec<f64>, b: Vec<f64> },
    Standard { c: Vec<f64> },
}

impl ScalingRecord {
    pub fn from_piecewise(ps: &PiecewiseScaling) -> Self {
        ScalingRecord::Piecewise { projection: ps.projection.to_rows(), a: ps.a.clone(), b: ps.b.clone() }
    }

    /// Rebuilds a piecewise scaling; the projection is re-validated.
    pub fn to_piecewise(&self, tol: f64) -> Result<Option<PiecewiseScaling>> {
        match self {
            ScalingRecord::Piecewise { projection, a, b } => {
                let m = rows_to_matrix(projection).map_err(Error::InvalidProjection)?;
                let p = OrthogonalProjection::from_matrix(m, tol)?;
                Ok(Some(PiecewiseScaling::new(p, a.clone(), b.clone())?))
            }
            ScalingRecord::Standard { .. } => Ok(None),
        }
    }
}

/// Machine-readable outcome of one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub tolerance: f64,
    pub verdict: String,
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    pub version: String,
}

impl Report {
    pub fn new(command: &str, input: &str, tolerance: f64, verdict: &str) -> Self {
        Self {
            command: command.to_string(),
            input: input.to_string(),
            tolerance,
            verdict: verdict.to_string(),
            residuals: BTreeMap::new(),
            scaling: None,
            certificate: None,
            seed: None,
            details: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| json_error(e, &path.display().to_string()))
    }
}
