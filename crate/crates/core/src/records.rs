//! Multi-channel vibration records and their on-disk format.
//!
//! A record is stored as a pair of files: `<name>.csv` holds one row per
//! sample and one column per channel (no header), and `<name>.meta.json`
//! carries the sample rate, start time, channel descriptions and free-form
//! annotations. Time is implicit: sample `k` is taken at
//! `start_time + k / sample_rate`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when mapping times onto sample indices.
const INDEX_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    AccelerationZ,
    AngularVelocityX,
}

impl ChannelKind {
    /// The storage unit every channel of this kind must use.
    pub fn unit(self) -> Unit {
        match self {
            ChannelKind::AccelerationZ => Unit::MPerS2,
            ChannelKind::AngularVelocityX => Unit::DegPerS,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::AccelerationZ => "acceleration_z",
            ChannelKind::AngularVelocityX => "angular_velocity_x",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[serde(rename = "m_per_s2")]
    MPerS2,
    DegPerS,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::MPerS2 => "m_per_s2",
            Unit::DegPerS => "deg_per_s",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub id: String,
    pub kind: ChannelKind,
    pub unit: Unit,
    /// Position along the main-span axis (m).
    #[serde(rename = "position_x_m")]
    pub position_x: f64,
    /// Lateral offset from the deck centerline (m).
    #[serde(rename = "position_y_m")]
    pub position_y: f64,
}

impl ChannelSpec {
    /// Channel whose unit is implied by its kind.
    pub fn new(id: impl Into<String>, kind: ChannelKind, position_x: f64, position_y: f64) -> Self {
        ChannelSpec {
            id: id.into(),
            kind,
            unit: kind.unit(),
            position_x,
            position_y,
        }
    }

    fn validate(&self, span_length: Option<f64>) -> Result<()> {
        if self.kind.unit() != self.unit {
            return Err(Error::UnitKindMismatch {
                channel: self.id.clone(),
                kind: self.kind.to_string(),
                unit: self.unit.to_string(),
            });
        }
        if !self.position_x.is_finite() || !self.position_y.is_finite() {
            return Err(Error::InconsistentRecord(format!(
                "channel {} has a non-finite position",
                self.id
            )));
        }
        if let Some(span) = span_length {
            if self.position_x < 0.0 || self.position_x > span {
                return Err(Error::PositionOutsideSpan {
                    channel: self.id.clone(),
                    position_x: self.position_x,
                    span,
                });
            }
        }
        Ok(())
    }
}

/// Synchronized multi-channel samples sharing one time base.
///
/// Immutable after construction; every constructor enforces the record
/// invariants (positive rate, at least two samples, finite values, units
/// consistent with channel kinds).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    sample_rate: f64,
    start_time: f64,
    span_length: Option<f64>,
    channels: Vec<ChannelSpec>,
    /// Channel-major storage: `columns[c][k]` is sample `k` of channel `c`.
    columns: Vec<Vec<f64>>,
    annotations: BTreeMap<String, String>,
}

impl TimeSeriesRecord {
    pub fn new(
        sample_rate: f64,
        start_time: f64,
        channels: Vec<ChannelSpec>,
        columns: Vec<Vec<f64>>,
        annotations: BTreeMap<String, String>,
    ) -> Result<Self> {
        Self::with_span(
            sample_rate,
            start_time,
            None,
            channels,
            columns,
            annotations,
        )
    }

    /// Like [`TimeSeriesRecord::new`] but also checks channel positions
    /// against a declared span length.
    pub fn with_span(
        sample_rate: f64,
        start_time: f64,
        span_length: Option<f64>,
        channels: Vec<ChannelSpec>,
        columns: Vec<Vec<f64>>,
        annotations: BTreeMap<String, String>,
    ) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidRate(sample_rate));
        }
        if !start_time.is_finite() {
            return Err(Error::invalid("start time must be finite"));
        }
        if let Some(span) = span_length {
            if !(span.is_finite() && span > 0.0) {
                return Err(Error::invalid("span length must be positive"));
            }
        }
        if channels.is_empty() {
            return Err(Error::InconsistentRecord("record has no channels".into()));
        }
        if channels.len() != columns.len() {
            return Err(Error::InconsistentRecord(format!(
                "{} channel specs but {} sample columns",
                channels.len(),
                columns.len()
            )));
        }
        for ch in &channels {
            ch.validate(span_length)?;
        }
        let n = columns[0].len();
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InconsistentRecord(format!(
                    "channel {} has {} samples, channel 0 has {}",
                    channels[c].id,
                    col.len(),
                    n
                )));
            }
            if let Some(k) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample { row: k, channel: c });
            }
        }
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        Ok(TimeSeriesRecord {
            sample_rate,
            start_time,
            span_length,
            channels,
            columns,
            annotations,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn span_length(&self) -> Option<f64> {
        self.span_length
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.channels
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.columns[0].len()
    }

    /// Covered time span `n_samples / sample_rate` (s).
    pub fn duration(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn channel_index(&self, id: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.id == id)
    }

    pub fn annotations(&self) -> &BTreeMap<String, String> {
        &self.annotations
    }

    pub fn annotation(&self, key: &str) -> Option<&str> {
        self.annotations.get(key).map(String::as_str)
    }

    /// Time of sample `k` (s).
    pub fn time_of(&self, k: usize) -> f64 {
        self.start_time + k as f64 / self.sample_rate
    }

    /// Copy of this record with different sample columns (same layout).
    pub fn with_columns(&self, columns: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_span(
            self.sample_rate,
            self.start_time,
            self.span_length,
            self.channels.clone(),
            columns,
            self.annotations.clone(),
        )
    }

    /// Copy of this record with an extra annotation.
    pub fn annotated(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.annotations.insert(key.into(), value.into());
        self
    }

    /// First sample index whose time is `>= t` (clamped to `n_samples`).
    fn index_at_or_after(&self, t: f64) -> usize {
        let x = (t - self.start_time) * self.sample_rate;
        let nearest = x.round();
        let k = if (x - nearest).abs() <= INDEX_EPS * nearest.abs().max(1.0) {
            nearest
        } else {
            x.ceil()
        };
        k.clamp(0.0, self.n_samples() as f64) as usize
    }
}

/// Restrict a record to samples with times in `[t0, t1)`.
///
/// Times are on the record's own axis, i.e. they include `start_time`.
pub fn slice_time(record: &TimeSeriesRecord, t0: f64, t1: f64) -> Result<TimeSeriesRecord> {
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("window bounds must be finite"));
    }
    if t1 < t0 {
        return Err(Error::ReversedWindow { t0, t1 });
    }
    let (start, end) = (record.start_time(), record.end_time());
    let slack = INDEX_EPS / record.sample_rate;
    if t0 < start - slack || t1 > end + slack {
        return Err(Error::WindowOutOfRange { t0, t1, start, end });
    }
    let lo = record.index_at_or_after(t0);
    let hi = record.index_at_or_after(t1);
    if hi <= lo {
        return Err(Error::EmptyWindow { t0, t1 });
    }
    if hi - lo < 2 {
        return Err(Error::TooFewSamples(hi - lo));
    }
    let columns = record.columns.iter().map(|c| c[lo..hi].to_vec()).collect();
    TimeSeriesRecord::with_span(
        record.sample_rate,
        record.time_of(lo),
        record.span_length,
        record.channels.clone(),
        columns,
        record.annotations.clone(),
    )
}

/// A labelled group of repeated measurements with a common channel layout.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    label: String,
    records: Vec<TimeSeriesRecord>,
}

impl MeasurementSet {
    pub fn new(label: impl Into<String>, records: Vec<TimeSeriesRecord>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyMeasurementSet)?;
        let layout: Vec<(&str, ChannelKind)> = first
            .channels()
            .iter()
            .map(|c| (c.id.as_str(), c.kind))
            .collect();
        for (i, r) in records.iter().enumerate().skip(1) {
            let other: Vec<(&str, ChannelKind)> = r
                .channels()
                .iter()
                .map(|c| (c.id.as_str(), c.kind))
                .collect();
            if other != layout {
                return Err(Error::InconsistentRecord(format!(
                    "record {i} channel layout differs from record 0"
                )));
            }
        }
        Ok(MeasurementSet {
            label: label.into(),
            records,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn records(&self) -> &[TimeSeriesRecord] {
        &self.records
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    sample_rate_hz: f64,
    start_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    span_length_m: Option<f64>,
    channels: Vec<ChannelSpec>,
    #[serde(default)]
    annotations: BTreeMap<String, String>,
}

/// Sidecar path belonging to a data file: `<name>.csv` -> `<name>.meta.json`.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    let stem = data_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    data_path.with_file_name(format!("{stem}.meta.json"))
}

pub fn read_record(path: impl AsRef<Path>) -> Result<TimeSeriesRecord> {
    let path = path.as_ref();
    let meta_path = sidecar_path(path);
    if !meta_path.exists() {
        return Err(Error::MissingSidecar(meta_path));
    }
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Sidecar = serde_json::from_str(&meta_text).map_err(|e| Error::Metadata {
        path: meta_path.clone(),
        message: e.to_string(),
    })?;
    if !(meta.sample_rate_hz.is_finite() && meta.sample_rate_hz > 0.0) {
        return Err(Error::InvalidRate(meta.sample_rate_hz));
    }
    for ch in &meta.channels {
        ch.validate(meta.span_length_m)?;
    }

    let n_ch = meta.channels.len();
    let mut columns = vec![Vec::new(); n_ch];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_io(path, e))?;
    for (row, result) in reader.records().enumerate() {
        let rec = result.map_err(|e| csv_io(path, e))?;
        if rec.len() != n_ch {
            return Err(Error::RaggedRows {
                row,
                found: rec.len(),
                expected: n_ch,
            });
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::ParseSample {
                row,
                column: c,
                text: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { row, channel: c });
            }
            columns[c].push(v);
        }
    }
    TimeSeriesRecord::with_span(
        meta.sample_rate_hz,
        meta.start_time_s,
        meta.span_length_m,
        meta.channels,
        columns,
        meta.annotations,
    )
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Write `<name>.csv` and its `<name>.meta.json` sidecar.
///
/// Values are printed in shortest round-trip form, so a read reproduces the
/// record exactly.
pub fn write_record(record: &TimeSeriesRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    // Records are validated on construction; re-check before touching disk.
    for (c, col) in record.columns.iter().enumerate() {
        if let Some(k) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { row: k, channel: c });
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for k in 0..record.n_samples() {
        line.clear();
        for (c, col) in record.columns.iter().enumerate() {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&format_sample(col[k]));
        }
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;

    let meta = Sidecar {
        sample_rate_hz: record.sample_rate,
        start_time_s: record.start_time,
        span_length_m: record.span_length,
        channels: record.channels.clone(),
        annotations: record.annotations.clone(),
    };
    let meta_path = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Metadata {
        path: meta_path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&meta_path, text + "\n").map_err(|e| Error::io(&meta_path, e))
}

fn format_sample(v: f64) -> String {
    // `{:?}` keeps a decimal point for integral values ("2.0", not "2").
    format!("{v:?}")
}

/// Data files (`*.csv` with a sidecar) in a directory, sorted by name.
pub fn list_records(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|e| e == "csv") && sidecar_path(&p).exists() {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}
