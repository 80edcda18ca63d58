use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the toolkit. Each variant is a distinct error code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed metadata sidecar {path}: {message}")]
    Metadata { path: PathBuf, message: String },
    #[error("metadata sidecar not found: {0}")]
    MissingSidecar(PathBuf),
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("unparsable sample at row {row}, column {column}: {text:?}")]
    ParseSample {
        row: usize,
        column: usize,
        text: String,
    },
    #[error("non-finite sample at row {row}, channel {channel}")]
    NonFiniteSample { row: usize, channel: usize },
    #[error("channel {channel}: unit {unit} does not match kind {kind}")]
    UnitKindMismatch {
        channel: String,
        kind: String,
        unit: String,
    },
    #[error("channel {channel} position {position_x} m lies outside span [0, {span}] m")]
    PositionOutsideSpan {
        channel: String,
        position_x: f64,
        span: f64,
    },
    #[error("record needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("inconsistent record layout: {0}")]
    InconsistentRecord(String),
    #[error("time window [{t0}, {t1}) is reversed")]
    ReversedWindow { t0: f64, t1: f64 },
    #[error("time window [{t0}, {t1}) selects no samples")]
    EmptyWindow { t0: f64, t1: f64 },
    #[error("time window [{t0}, {t1}) exceeds record span [{start}, {end})")]
    WindowOutOfRange {
        t0: f64,
        t1: f64,
        start: f64,
        end: f64,
    },
    #[error("measurement set is empty")]
    EmptyMeasurementSet,

    #[error("band upper edge {hi} Hz exceeds Nyquist frequency {nyquist} Hz")]
    BandAboveNyquist { hi: f64, nyquist: f64 },
    #[error("channel {0} has zero magnitude inside the normalization band")]
    DegenerateSignal(String),
    #[error("band [{lo}, {hi}] Hz contains no spectral bins")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("record of {samples} samples is too short for {requested}")]
    RecordTooShort { samples: usize, requested: String },
    #[error("invalid model order {order}: {reason}")]
    InvalidOrder { order: usize, reason: String },
    #[error("block Hankel rank below order {order}: s_order/s_1 = {ratio:e}")]
    RankDeficient { order: usize, ratio: f64 },
    #[error("eigenvalue decomposition did not converge")]
    EigenNoConvergence,
    #[error("mode shape has zero norm")]
    DegenerateShape,

    #[error("no decaying envelope found")]
    NoDecayDetected,
    #[error("segment of {duration} s is shorter than the {required} s required")]
    SegmentTooShort { duration: f64, required: f64 },
    #[error("found {found} oscillation maxima, need {required}")]
    TooFewMaxima { found: usize, required: usize },
    #[error("peak amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("no channel produced a usable decay for mode {0}")]
    NoUsableChannel(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("unknown mode label {0:?}")]
    UnknownMode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
