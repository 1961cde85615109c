use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest parse error: {0}")]
    Manifest(String),

    #[error("scale sidecar error: {0}")]
    Scale(String),

    #[error("{axis} value {value} outside [{min}, {max}] (clip {clip_id:?})")]
    LabelOutOfRange {
        clip_id: String,
        axis: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("duplicate clip_id {0:?}")]
    DuplicateClip(String),

    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("audio clip too short: {samples} samples, need at least {needed}")]
    ClipTooShort { samples: usize, needed: usize },

    #[error("too few frames: {frames}, need more than {needed}")]
    TooFewFrames { frames: usize, needed: usize },

    #[error("unsupported audio: {0}")]
    Audio(String),

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated or malformed file: {0}")]
    Structure(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no clip ids in common between embeddings and labels")]
    NoOverlap,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("target values are constant; R² is undefined")]
    ConstantTarget,

    #[error("missing inputs: {0}")]
    MissingInputs(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Manifest(_) => "manifest",
            Error::Scale(_) => "scale",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::DuplicateClip(_) => "duplicate_clip",
            Error::TooFewRecords { .. } => "too_few_records",
            Error::Empty(_) => "empty",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::ClipTooShort { .. } => "clip_too_short",
            Error::TooFewFrames { .. } => "too_few_frames",
            Error::Audio(_) => "audio",
            Error::BadMagic { .. } => "bad_magic",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::Structure(_) => "structure",
            Error::NonFinite(_) => "non_finite",
            Error::NoOverlap => "no_overlap",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Diverged { .. } => "diverged",
            Error::ConstantTarget => "constant_target",
            Error::MissingInputs(_) => "missing_inputs",
        }
    }
}
