use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("clip `{clip}` present in {present_in} but missing from {missing_from}")]
    MissingClip { clip: String, present_in: &'static str, missing_from: &'static str },
    #[error("clip `{clip}` has score classes {found:?}, expected {expected:?}")]
    InconsistentClasses { clip: String, expected: Vec<String>, found: Vec<String> },
    #[error("clip `{clip}`: ground-truth label `{label}` is not a score class")]
    UnknownLabel { clip: String, label: String },
    #[error("{context}: timestamps are not strictly increasing")]
    NonMonotoneTimestamps { context: String },
    #[error("{context}: non-finite value")]
    NonFiniteScore { context: String },
    #[error("clip `{clip}`: event ({onset}, {offset}) lies outside [0, {duration}]")]
    EventOutOfBounds { clip: String, onset: f64, offset: f64, duration: f64 },
    #[error("{context}: zero-length event at {onset}")]
    ZeroLengthEvent { context: String, onset: f64 },
    #[error("clip `{clip}`: duration {duration} is shorter than last timestamp {last_timestamp}")]
    DurationTooShort { clip: String, duration: f64, last_timestamp: f64 },
    #[error("index {index} out of range for curve with {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("bad header: expected {expected}, found `{found}`")]
    BadHeader { expected: String, found: String },
    #[error("line {line}: row offset does not equal the next row's onset")]
    NonContiguousRows { line: usize },
    #[error("line {line}: negative onset")]
    NegativeOnset { line: usize },
    #[error("line {line}: offset is not after onset")]
    OffsetNotAfterOnset { line: usize },
    #[error("clip `{clip}`: duration must be positive")]
    NonPositiveDuration { clip: String },
    #[error("clip `{clip}` listed more than once")]
    DuplicateClip { clip: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("score table has no frames")]
    EmptyTimeline,
    #[error("class names must be unique and non-empty: {0:?}")]
    BadClassNames(Vec<String>),
    #[error("median filter width must be odd, got {0}")]
    EvenWidth(usize),
    #[error("median filter width must be positive")]
    NonPositiveWidth,
    #[error("segment length must be positive")]
    NonPositiveSegmentLength,
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("cumulative count became negative at score {score} (class `{class}`)")]
    NegativeCumulativeCount { class: String, score: f64 },
    #[error("class `{0}` has no ground-truth positives")]
    NoGroundTruth(String),
    #[error("empty curve")]
    EmptyCurve,
    #[error("class `{0}` has zero ground-truth duration but alpha_ct > 0")]
    ZeroCrossDuration(String),
    #[error("no classes to summarize")]
    NoClasses,
    #[error("x values are not ascending")]
    UnsortedInput,
    #[error("threshold list is empty")]
    EmptyThresholdList,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
