//! Trace CSV, summary JSON and the combined discrimination/accuracy table.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::RunSummary;
use crate::error::{Error, Result};
use crate::parity::CommunityCounts;
use crate::strategy::ChunkMetrics;

pub const TRACE_COLUMNS: [&str; 19] = [
    "t",
    "size",
    "accuracy",
    "discrimination",
    "true_discrimination",
    "triggered",
    "massaged",
    "reset",
    "corrected",
    "degenerate",
    "partial",
    "pred_dr",
    "pred_dg",
    "pred_fr",
    "pred_fg",
    "true_dr",
    "true_dg",
    "true_fr",
    "true_fg",
];

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        None => Ok(()),
    }
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_trace(path: &Path, trace: &[ChunkMetrics]) -> Result<()> {
    ensure_parent(path)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(TRACE_COLUMNS).map_err(|e| Error::csv(path, e))?;
    for m in trace {
        let p = &m.predicted_counts;
        let t = &m.true_counts;
        let row = [
            m.t.to_string(),
            m.size.to_string(),
            f6(m.accuracy),
            f6(m.discrimination),
            f6(m.true_discrimination),
            flag(m.triggered).into(),
            m.massaged.to_string(),
            flag(m.reset).into(),
            flag(m.corrected).into(),
            flag(m.degenerate).into(),
            flag(m.partial).into(),
            f6(p.dr),
            f6(p.dg),
            f6(p.fr),
            f6(p.fg),
            f6(t.dr),
            f6(t.dg),
            f6(t.fr),
            f6(t.fg),
        ];
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<ChunkMetrics>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            message: "unexpected trace header".into(),
        });
    }
    let mut trace = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |col: &str| Error::Parse {
            path: path.into(),
            line,
            message: format!("bad value in column '{col}'"),
        };
        let num = |i: usize| record[i].parse::<f64>().map_err(|_| bad(TRACE_COLUMNS[i]));
        let int = |i: usize| record[i].parse::<usize>().map_err(|_| bad(TRACE_COLUMNS[i]));
        let boolean = |i: usize| match &record[i] {
            "1" => Ok(true),
            "0" => Ok(false),
            _ => Err(bad(TRACE_COLUMNS[i])),
        };
        trace.push(ChunkMetrics {
            t: int(0)?,
            size: int(1)?,
            accuracy: num(2)?,
            discrimination: num(3)?,
            true_discrimination: num(4)?,
            triggered: boolean(5)?,
            massaged: int(6)?,
            reset: boolean(7)?,
            corrected: boolean(8)?,
            degenerate: boolean(9)?,
            partial: boolean(10)?,
            predicted_counts: CommunityCounts::new(num(11)?, num(12)?, num(13)?, num(14)?),
            true_counts: CommunityCounts::new(num(15)?, num(16)?, num(17)?, num(18)?),
        });
    }
    Ok(trace)
}

/// Rounds every float in a JSON tree to 6 decimals.
fn round_floats(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                let r = (x * 1e6).round() / 1e6;
                if let Some(num) = serde_json::Number::from_f64(r) {
                    *n = num;
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to 6 decimals.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut tree = serde_json::to_value(value).map_err(|e| Error::json(path, e))?;
    round_floats(&mut tree);
    let mut text = serde_json::to_string_pretty(&tree).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    write_json(path, summary)
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    read_json(path)
}

/// One line of the combined table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub classifier: String,
    pub strategy: String,
    pub correction: String,
    pub accuracy: f64,
    pub discrimination: f64,
    /// Euclidean distance of (discrimination, accuracy) to (0, 1).
    pub distance: f64,
}

pub fn distance_to_ideal(discrimination: f64, accuracy: f64) -> f64 {
    discrimination.hypot(1.0 - accuracy)
}

/// Rows sorted by distance to the ideal point, nearest first; ties keep
/// input order.
pub fn build_report(summaries: &[RunSummary]) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = summaries
        .iter()
        .map(|s| ReportRow {
            label: s.label.clone(),
            classifier: s.classifier.to_string(),
            strategy: s.strategy.to_string(),
            correction: s.correction.map_or_else(String::new, |c| c.to_string()),
            accuracy: s.mean_accuracy,
            discrimination: s.mean_discrimination,
            distance: distance_to_ideal(s.mean_discrimination, s.mean_accuracy),
        })
        .collect();
    rows.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    rows
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    ensure_parent(path)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record([
        "label",
        "classifier",
        "strategy",
        "correction",
        "accuracy",
        "discrimination",
        "distance",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.classifier.clone(),
            r.strategy.clone(),
            r.correction.clone(),
            f6(r.accuracy),
            f6(r.discrimination),
            f6(r.distance),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}
