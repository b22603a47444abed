//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while reading records or running the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed text input (header or manifest), with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Signal format code we do not decode (only 212 and 16 are supported).
    #[error("unsupported signal format {0}")]
    UnsupportedFormat(u32),

    /// The .dat file is shorter than the header-declared sample count needs.
    #[error("truncated signal data: expected at least {expected} bytes, found {found}")]
    TruncatedSignal { expected: usize, found: usize },

    /// Header fields are structurally present but semantically unusable.
    #[error("invalid header: {0}")]
    InvalidHeader(String),

    /// Wavelet decomposition cannot proceed (signal too short for the level).
    #[error("decomposition error: {0}")]
    Decomposition(String),

    /// A requested subband does not exist in the decomposition.
    #[error("unknown band: {0}")]
    UnknownBand(String),

    /// Fusion preconditions violated (e.g. fewer non-empty leads than min_leads).
    #[error("fusion error: {0}")]
    Fusion(String),

    /// A configuration value is out of its documented range.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
