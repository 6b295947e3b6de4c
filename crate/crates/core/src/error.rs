use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("channel `{0}` not present")]
    MissingChannel(String),

    #[error("signal too short: {len} samples, need at least {required}")]
    SignalTooShort { len: usize, required: usize },

    #[error("epoch for event {event} (sample {sample_index}) spans [{start}, {end}) outside recording of {len} samples")]
    EpochOutOfBounds {
        event: usize,
        sample_index: usize,
        start: i64,
        end: i64,
        len: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate baseline: reference power is zero")]
    DegenerateBaseline,

    #[error("incompatible combination {combination} for {kind} stimulus")]
    IncompatibleCombination { combination: String, kind: String },

    #[error("missing stimulus metadata: {0}")]
    MissingStimulus(String),

    #[error("missing task {0}")]
    MissingTask(u8),

    #[error("dataset format version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("sample file holds {found} bytes, manifest implies {expected}")]
    SizeMismatch { found: u64, expected: u64 },

    #[error("unknown channel label `{0}`")]
    UnknownChannel(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::MissingChannel(_) => "missing_channel",
            Error::SignalTooShort { .. } => "signal_too_short",
            Error::EpochOutOfBounds { .. } => "epoch_out_of_bounds",
            Error::Empty(_) => "empty_input",
            Error::DegenerateBaseline => "degenerate_baseline",
            Error::IncompatibleCombination { .. } => "incompatible_combination",
            Error::MissingStimulus(_) => "missing_stimulus",
            Error::MissingTask(_) => "missing_task",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::UnknownChannel(_) => "unknown_channel",
            Error::Manifest(_) => "manifest",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
