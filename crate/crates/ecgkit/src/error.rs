use std::path::PathBuf;

use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown rhythm label: {0:?}")]
    UnknownLabel(String),
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("non-positive sampling rate in {0}")]
    NonPositiveSamplingRate(PathBuf),
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sampling rate {fs_hz} Hz too low for cutoff {cutoff_hz} Hz")]
    SamplingRateTooLow { fs_hz: f64, cutoff_hz: f64 },
    #[error("signal too short: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },
    #[error("empty signal")]
    EmptySignal,
    #[error("fewer than 2 beats detected")]
    NoBeatsDetected,
    #[error("series too short: {len} values, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("empty series")]
    EmptySeries,
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("too few beats: {0}")]
    TooFewBeats(usize),
    #[error("signal length {len} is not a multiple of {block}")]
    LengthNotAligned { len: usize, block: usize },
    #[error("unknown wavelet: {0:?}")]
    UnknownWavelet(String),
    #[error("decomposition level {0} out of range")]
    LevelOutOfRange(usize),
    #[error("all coefficient levels carry zero energy")]
    ZeroTotalEnergy,
    #[error("class {0} has fewer than 2 rows, cannot oversample")]
    ClassTooSmall(String),
    #[error("undersample target {target} exceeds class count {count}")]
    TargetExceedsCount { target: usize, count: usize },
    #[error("class {0} missing from dataset")]
    MissingClass(String),
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("model file version {found:?} not supported (expected {expected:?})")]
    VersionMismatch { expected: String, found: String },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("class {class} has {count} rows, fewer than k={k} folds")]
    ClassTooSmallForK { class: String, count: usize, k: usize },
    #[error("unknown feature subset: {0:?}")]
    UnknownSubset(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("invalid rhythm script: {0}")]
    InvalidScript(String),
    #[error("record {id}: {source}")]
    Record {
        id: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a record id to an error propagating out of per-record processing.
    pub fn with_record(self, id: &str) -> Error {
        Error::Record {
            id: id.to_string(),
            source: Box::new(self),
        }
    }

    /// Process exit code family for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Record { source, .. } => source.exit_code(),
            Error::Io(_) | Error::MissingFile(_) => 2,
            Error::MalformedHeader { .. }
            | Error::NonPositiveSamplingRate(_)
            | Error::UnknownLabel(_)
            | Error::DimensionMismatch { .. } => 3,
            Error::SamplingRateTooLow { .. }
            | Error::SignalTooShort { .. }
            | Error::EmptySignal
            | Error::EmptySeries
            | Error::ZeroVariance
            | Error::SeriesTooShort { .. } => 4,
            Error::NoBeatsDetected | Error::TooFewBeats(_) => 5,
            Error::LengthNotAligned { .. }
            | Error::UnknownWavelet(_)
            | Error::LevelOutOfRange(_)
            | Error::ZeroTotalEnergy => 6,
            Error::ClassTooSmall(_)
            | Error::TargetExceedsCount { .. }
            | Error::MissingClass(_) => 7,
            Error::DegenerateDataset(_)
            | Error::VersionMismatch { .. }
            | Error::CorruptModel(_) => 8,
            Error::ClassTooSmallForK { .. }
            | Error::UnknownSubset(_)
            | Error::EmptyGrid
            | Error::InvalidScript(_) => 9,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
