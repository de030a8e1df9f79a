//! Tab-separated input formats and deterministic curve reports.
//!
//! * score file, one per clip: `onset\toffset\t<class>...`, one row per frame
//! * ground truth: `filename\tonset\toffset\tevent_label`
//! * durations: `filename\tduration`
//!
//! Clip ids are file names without their extension.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{validate_dataset, Dataset, Event, ScoreTimeline};
use crate::scalar::Scalar;

const GT_HEADER: [&str; 4] = ["filename", "onset", "offset", "event_label"];
const DURATION_HEADER: [&str; 2] = ["filename", "duration"];

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| !l.trim().is_empty())
}

fn number<T: Scalar>(cell: &str, line: usize) -> Result<T> {
    let v: T = cell.trim().parse().map_err(|_| Error::Parse { line, message: format!("`{cell}` is not a number") })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteScore { context: format!("line {line}") });
    }
    Ok(v)
}

fn check_header(found: Option<(usize, &str)>, expected: &[&str]) -> Result<()> {
    let found = found.map(|(_, l)| l).unwrap_or("");
    let cells: Vec<&str> = found.split('\t').map(str::trim).collect();
    if cells != expected {
        return Err(Error::BadHeader { expected: expected.join("\\t"), found: found.to_string() });
    }
    Ok(())
}

/// Clip id of an annotation file name: the name without its last extension.
pub fn clip_id(filename: &str) -> &str {
    let name = filename.rsplit('/').next().unwrap_or(filename);
    match name.rfind('.') {
        Some(i) if i > 0 => &name[..i],
        _ => name,
    }
}

pub fn parse_score_file<T: Scalar>(text: &str) -> Result<ScoreTimeline<T>> {
    let mut rows = lines(text);
    let header = rows.next();
    let cells: Vec<&str> = header.map(|(_, l)| l.split('\t').map(str::trim).collect()).unwrap_or_default();
    if cells.len() < 3 || cells[0] != "onset" || cells[1] != "offset" {
        return Err(Error::BadHeader {
            expected: "onset\\toffset\\t<class>...".into(),
            found: header.map(|(_, l)| l.to_string()).unwrap_or_default(),
        });
    }
    let class_names: Vec<String> = cells[2..].iter().map(|s| s.to_string()).collect();

    let mut timestamps: Vec<T> = Vec::new();
    let mut scores = Vec::new();
    for (line, row) in rows {
        let cells: Vec<&str> = row.split('\t').collect();
        if cells.len() != class_names.len() + 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} columns, found {}", class_names.len() + 2, cells.len()),
            });
        }
        let onset: T = number(cells[0], line)?;
        let offset: T = number(cells[1], line)?;
        match timestamps.last() {
            None if onset < T::zero() => return Err(Error::NonMonotoneTimestamps { context: format!("line {line}") }),
            None => timestamps.push(onset),
            Some(&prev) if prev != onset => return Err(Error::NonContiguousRows { line }),
            Some(_) => {}
        }
        if offset <= onset {
            return Err(Error::NonMonotoneTimestamps { context: format!("line {line}") });
        }
        timestamps.push(offset);
        let row: Vec<T> = cells[2..].iter().map(|c| number(c, line)).collect::<Result<_>>()?;
        scores.push(row);
    }
    ScoreTimeline::from_rows(timestamps, &scores, class_names)
}

pub fn write_score_file<T: Scalar>(timeline: &ScoreTimeline<T>) -> String {
    let mut out = format!("onset\toffset\t{}\n", timeline.class_names().join("\t"));
    let ts = timeline.timestamps();
    for i in 0..timeline.num_frames() {
        out.push_str(&format!("{}\t{}", ts[i], ts[i + 1]));
        for column in timeline.columns() {
            out.push_str(&format!("\t{}", column[i]));
        }
        out.push('\n');
    }
    out
}

/// Events grouped by clip id, in file order.
///
/// A row with only a file name (remaining cells empty or absent) declares a
/// clip without events.
pub fn parse_ground_truth<T: Scalar>(text: &str) -> Result<BTreeMap<String, Vec<Event<T>>>> {
    let mut rows = lines(text);
    check_header(rows.next(), &GT_HEADER)?;
    let mut out: BTreeMap<String, Vec<Event<T>>> = BTreeMap::new();
    for (line, row) in rows {
        let cells: Vec<&str> = row.split('\t').collect();
        let id = clip_id(cells[0].trim()).to_string();
        if id.is_empty() {
            return Err(Error::Parse { line, message: "empty filename".into() });
        }
        if cells[1..].iter().all(|c| c.trim().is_empty()) {
            out.entry(id).or_default();
            continue;
        }
        if cells.len() != 4 {
            return Err(Error::Parse { line, message: format!("expected 4 columns, found {}", cells.len()) });
        }
        let onset: T = number(cells[1], line)?;
        let offset: T = number(cells[2], line)?;
        if onset < T::zero() {
            return Err(Error::NegativeOnset { line });
        }
        if offset <= onset {
            return Err(Error::OffsetNotAfterOnset { line });
        }
        let label = cells[3].trim();
        if label.is_empty() {
            return Err(Error::Parse { line, message: "empty event label".into() });
        }
        out.entry(id).or_default().push(Event { onset, offset, label: label.to_string() });
    }
    Ok(out)
}

pub fn write_ground_truth<T: Scalar>(ground_truth: &BTreeMap<String, Vec<Event<T>>>) -> String {
    let mut out = GT_HEADER.join("\t");
    out.push('\n');
    for (id, events) in ground_truth {
        if events.is_empty() {
            out.push_str(&format!("{id}.wav\t\t\t\n"));
        }
        for e in events {
            out.push_str(&format!("{id}.wav\t{}\t{}\t{}\n", e.onset, e.offset, e.label));
        }
    }
    out
}

pub fn parse_durations<T: Scalar>(text: &str) -> Result<BTreeMap<String, T>> {
    let mut rows = lines(text);
    check_header(rows.next(), &DURATION_HEADER)?;
    let mut out = BTreeMap::new();
    for (line, row) in rows {
        let cells: Vec<&str> = row.split('\t').collect();
        if cells.len() != 2 {
            return Err(Error::Parse { line, message: format!("expected 2 columns, found {}", cells.len()) });
        }
        let id = clip_id(cells[0].trim()).to_string();
        let duration: T = number(cells[1], line)?;
        if duration <= T::zero() {
            return Err(Error::NonPositiveDuration { clip: id });
        }
        if out.insert(id.clone(), duration).is_some() {
            return Err(Error::DuplicateClip { clip: id });
        }
    }
    Ok(out)
}

pub fn write_durations<T: Scalar>(durations: &BTreeMap<String, T>) -> String {
    let mut out = DURATION_HEADER.join("\t");
    out.push('\n');
    for (id, d) in durations {
        out.push_str(&format!("{id}.wav\t{d}\n"));
    }
    out
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Loads `scores_dir/*.tsv`, the ground-truth table and the durations table.
///
/// Clips listed in the durations table with a score file but no ground-truth
/// rows are evaluated as clips without events.
pub fn load_dataset<T: Scalar>(scores_dir: &Path, ground_truth: &Path, durations: &Path) -> Result<Dataset<T>> {
    let mut files: Vec<_> = fs::read_dir(scores_dir)
        .map_err(|e| io_error(scores_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    let mut scores = BTreeMap::new();
    for path in files {
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let timeline = parse_score_file(&read_text(&path)?)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        scores.insert(id, timeline);
    }
    let mut gt = parse_ground_truth::<T>(&read_text(ground_truth)?).map_err(|e| io_error(ground_truth, e))?;
    let durations = parse_durations::<T>(&read_text(durations)?).map_err(|e| io_error(durations, e))?;
    for id in scores.keys() {
        if durations.contains_key(id) {
            gt.entry(id.clone()).or_default();
        }
    }
    validate_dataset(scores, gt, durations)
}

/// SHA-256 over the canonical serialization of every clip.
pub fn dataset_fingerprint<T: Scalar>(dataset: &Dataset<T>) -> String {
    let (scores, gt, durations) = dataset.to_parts();
    let mut hasher = Sha256::new();
    for (id, timeline) in &scores {
        hasher.update(id.as_bytes());
        hasher.update(write_score_file(timeline).as_bytes());
    }
    hasher.update(write_ground_truth(&gt).as_bytes());
    hasher.update(write_durations(&durations).as_bytes());
    hex::encode(hasher.finalize())
}

/// Formats with 12 significant digits, like C's `%.12g`.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim(mantissa));
    }
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{rounded:.decimals$}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Pr,
    Roc,
    PsdRoc,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Pr => "pr",
            CurveKind::Roc => "roc",
            CurveKind::PsdRoc => "psd_roc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One named curve; `x` ascending, `values[i]` aligned with the report's value keys.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub name: String,
    pub x: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl CurveSeries {
    /// Builds a series from unordered points, sorting them by `x` (stable).
    pub fn from_points(name: impl Into<String>, mut points: Vec<(f64, Vec<f64>)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x, values) = points.into_iter().unzip();
        Self { name: name.into(), x, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveReport {
    pub kind: CurveKind,
    pub x_key: String,
    pub value_keys: Vec<String>,
    pub series: Vec<CurveSeries>,
    pub scalars: BTreeMap<String, f64>,
    /// Effective configuration and dataset fingerprint.
    pub metadata: BTreeMap<String, String>,
}

impl CurveReport {
    pub fn new(kind: CurveKind, x_key: &str, value_keys: &[&str]) -> Self {
        Self {
            kind,
            x_key: x_key.to_string(),
            value_keys: value_keys.iter().map(|s| s.to_string()).collect(),
            series: Vec::new(),
            scalars: BTreeMap::new(),
            metadata: BTreeMap::new(),
        }
    }
}

fn json_number(x: f64) -> Value {
    format_number(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
}

/// Deterministic serialization: sorted keys, 12 significant digits.
pub fn write_report(report: &CurveReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = format!("series,{}", report.x_key);
            for k in &report.value_keys {
                out.push(',');
                out.push_str(k);
            }
            out.push('\n');
            for s in &report.series {
                for (x, values) in s.x.iter().zip(&s.values) {
                    out.push_str(&s.name);
                    out.push(',');
                    out.push_str(&format_number(*x));
                    for v in values {
                        out.push(',');
                        out.push_str(&format_number(*v));
                    }
                    out.push('\n');
                }
            }
            out
        }
        ReportFormat::Json => {
            let mut series = Map::new();
            for s in &report.series {
                let mut columns = Map::new();
                columns.insert(report.x_key.clone(), Value::Array(s.x.iter().map(|&v| json_number(v)).collect()));
                for (k, key) in report.value_keys.iter().enumerate() {
                    columns.insert(key.clone(), Value::Array(s.values.iter().map(|row| json_number(row[k])).collect()));
                }
                series.insert(s.name.clone(), Value::Object(columns));
            }
            let mut root = Map::new();
            root.insert("kind".into(), Value::String(report.kind.name().into()));
            root.insert(
                "metadata".into(),
                Value::Object(report.metadata.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
            );
            root.insert(
                "scalars".into(),
                Value::Object(report.scalars.iter().map(|(k, &v)| (k.clone(), json_number(v))).collect()),
            );
            root.insert("series".into(), Value::Object(series));
            let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
            text.push('\n');
            text
        }
    }
}
