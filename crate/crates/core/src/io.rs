//! File formats and result serialization.
//!
//! Series files are headerless `value,label` CSV rows; a first row that
//! does not parse as numbers is taken for a header and skipped. Score
//! files hold one number per line. JSON output has sorted keys and every
//! float rounded to 12 significant digits so files diff cleanly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};
use crate::measures::Evaluation;
use crate::model::ScoredSeries;

/// Significant digits kept in JSON output.
pub const JSON_DIGITS: usize = 12;

/// A series file: values and labels, before any detector score is paired
/// with it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub series_id: String,
    pub source_path: PathBuf,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
}

impl DatasetRecord {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pair with a detector score of the same length.
    pub fn with_score(&self, score: Vec<f64>) -> Result<ScoredSeries> {
        ScoredSeries::new(score, self.labels.clone())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn load_series(path: impl AsRef<Path>) -> Result<DatasetRecord> {
    let path = path.as_ref();
    parse_series(&read(path)?, path)
}

/// Parse series text; `path` only labels the record and its errors.
pub fn parse_series(text: &str, path: &Path) -> Result<DatasetRecord> {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut first_row = true;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if std::mem::take(&mut first_row) && fields[0].parse::<f64>().is_err() {
            // lenient mode: a non-numeric first row is a header
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 columns `value,label`, found {}", fields.len()),
            ));
        }
        let value: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("value `{}` is not a number", fields[0])))?;
        if !value.is_finite() {
            return Err(parse_err(
                path,
                line,
                format!("value `{}` is not finite", fields[0]),
            ));
        }
        let label = match fields[1].parse::<f64>() {
            Ok(0.0) => 0,
            Ok(1.0) => 1,
            _ => {
                return Err(parse_err(
                    path,
                    line,
                    format!("label `{}` is not 0 or 1", fields[1]),
                ))
            }
        };
        values.push(value);
        labels.push(label);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    Ok(DatasetRecord {
        series_id: series_id(path),
        source_path: path.to_path_buf(),
        values,
        labels,
    })
}

/// File stem, used as the series identifier.
pub fn series_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn load_score(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    parse_score(&read(path)?, path)
}

pub fn parse_score(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let v: f64 = row
            .parse()
            .map_err(|_| parse_err(path, idx + 1, format!("`{row}` is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(path, idx + 1, format!("`{row}` is not finite")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{} has no scores",
            path.display()
        )));
    }
    Ok(out)
}

/// Bring a score to length `n`. Shorter scores (subsequence detectors emit
/// n − ℓ points) are right-padded with their last value and a warning is
/// returned; longer ones are rejected.
pub fn align_score(mut score: Vec<f64>, n: usize) -> Result<(Vec<f64>, Option<String>)> {
    let len = score.len();
    if len > n {
        return Err(Error::invalid(format!(
            "score has {len} points, series has {n}"
        )));
    }
    if len == n {
        return Ok((score, None));
    }
    let last = *score
        .last()
        .ok_or_else(|| Error::EmptyInput("score is empty".into()))?;
    score.resize(n, last);
    Ok((
        score,
        Some(format!(
            "score has {len} points, series has {n}; padded {} points by repeating the last score",
            n - len
        )),
    ))
}

pub fn write_series(path: impl AsRef<Path>, values: &[f64], labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(values.len() * 24);
    for (v, l) in values.iter().zip(labels) {
        // `{}` on f64 prints the shortest string that parses back exactly
        text.push_str(&format!("{v},{l}\n"));
    }
    write_text(path, &text)
}

pub fn write_score(path: impl AsRef<Path>, score: &[f64]) -> Result<()> {
    let text: String = score.iter().map(|v| format!("{v}\n")).collect();
    write_text(path.as_ref(), &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `v` rounded to `digits` significant decimal digits.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", digits.saturating_sub(1), v)
        .parse()
        .unwrap_or(v)
}

/// Round every float in a JSON tree to [`JSON_DIGITS`] significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN), JSON_DIGITS);
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys, rounded floats and a trailing newline.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| Error::invalid(format!("serializing output: {e}")))?;
    render(&round_json(v))
}

fn render(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| Error::invalid(format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// The `eval` output object.
pub fn evaluation_json(series_id: &str, e: &Evaluation) -> Value {
    let measures: Map<String, Value> = e
        .measures
        .iter()
        .map(|(m, v)| (m.name().to_string(), json!(v)))
        .collect();
    round_json(json!({
        "series_id": series_id,
        "n": e.n,
        "anomaly_count": e.anomaly_count,
        "parameters": {
            "N": e.thresholds,
            "L": e.max_buffer,
            "buffer": e.buffer,
            "aggregation": e.aggregation.name(),
        },
        "measures": measures,
        "timing": {
            "impl": e.vus_impl.name(),
            "seconds": e.seconds,
        },
    }))
}

pub fn evaluation_to_json(series_id: &str, e: &Evaluation) -> Result<String> {
    render(&evaluation_json(series_id, e))
}

/// `series_id,measure,value` rows, values at 12 significant digits.
pub fn evaluation_to_csv(series_id: &str, e: &Evaluation) -> String {
    let mut out = String::from("series_id,measure,value\n");
    for (m, v) in &e.measures {
        out.push_str(&format!("{series_id},{m},{}\n", round_sig(*v, JSON_DIGITS)));
    }
    out
}
