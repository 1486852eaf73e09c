//! Crate-wide error type and result alias.

use std::fmt;
use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug)]
pub enum Error {
    /// Tensor shape violation (bad extent, element-count mismatch, ...).
    Shape(String),
    /// Class label outside the supported range or unknown class name.
    Label(String),
    /// Dataset-level problem (missing class directory, empty set, ...).
    Data(String),
    /// Invalid configuration value (split fraction, alpha, ...).
    Config(String),
    /// Malformed input to a metric or explanation routine.
    Input(String),
    /// Metric input that admits no answer (single-class ground truth, ...).
    Degenerate(String),
    /// Non-finite value where a finite one is required.
    Numeric(String),
    /// Class too small for oversampling.
    Balance(String),
    /// Image bytes could not be decoded.
    Decode { path: Option<PathBuf>, reason: String },
    /// Filesystem failure.
    Io { path: PathBuf, source: std::io::Error },
    /// Checkpoint file does not start with the expected magic bytes.
    BadMagic,
    /// Checkpoint format version not understood by this build.
    UnsupportedVersion(u32),
    /// Checkpoint payload failed CRC-32 verification.
    ChecksumMismatch { stored: u32, computed: u32 },
    /// Checkpoint is structurally broken (truncated, trailing bytes, ...).
    MalformedCheckpoint(String),
    /// Checkpoint describes a model this crate cannot load.
    ArchitectureMismatch(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Label(msg) => write!(f, "label error: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Input(msg) => write!(f, "input error: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::Balance(msg) => write!(f, "balance error: {msg}"),
            Error::Decode { path: Some(path), reason } => {
                write!(f, "decode error for {}: {reason}", path.display())
            }
            Error::Decode { path: None, reason } => write!(f, "decode error: {reason}"),
            Error::Io { path, source } => write!(f, "io error for {}: {source}", path.display()),
            Error::BadMagic => write!(f, "checkpoint error: bad magic bytes"),
            Error::UnsupportedVersion(v) => {
                write!(f, "checkpoint error: unsupported format version {v}")
            }
            Error::ChecksumMismatch { stored, computed } => write!(
                f,
                "checkpoint error: checksum mismatch (stored {stored:#010x}, computed {computed:#010x})"
            ),
            Error::MalformedCheckpoint(msg) => {
                write!(f, "checkpoint error: malformed file ({msg})")
            }
            Error::ArchitectureMismatch(msg) => {
                write!(f, "checkpoint error: architecture mismatch: {msg}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
