use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the core kit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} at index {index} in {what}")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("value {value} at index {index} in {what} is outside [0, 1]")]
    OutOfRange {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("dimension mismatch: {what} expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        actual: String,
    },

    #[error("scribble mask has no foreground pixels")]
    EmptyForeground,

    #[error("scribble mask has no background pixels")]
    EmptyBackground,

    #[error("no labeled pixels to supervise")]
    EmptySupervision,

    #[error("every feature vector has zero norm")]
    DegenerateFeatures,

    #[error("node {node} has no positive similarity to any node")]
    IsolatedNode { node: usize },

    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground truth has no foreground pixels")]
    EmptyGroundTruth,

    #[error("ground truth value {value} at index {index} is not binary")]
    NonBinaryGroundTruth { index: usize, value: f64 },

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("non-finite {term} loss ({value}) at step {step}")]
    NonFiniteLoss {
        step: usize,
        term: &'static str,
        value: f64,
    },

    #[error("bad magic at byte 0: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported version {found} at byte {offset} (expected {expected})")]
    VersionMismatch {
        offset: usize,
        expected: u32,
        found: u32,
    },

    #[error("truncated file: expected {expected} bytes, found {actual} (first missing byte at offset {actual})")]
    Truncated { expected: usize, actual: usize },

    #[error("trailing data: expected {expected} bytes, found {actual} (first extra byte at offset {expected})")]
    TrailingBytes { expected: usize, actual: usize },

    #[error("invalid header field {field} = {value} at byte {offset}")]
    InvalidHeader {
        field: &'static str,
        offset: usize,
        value: u32,
    },

    #[error("non-finite payload value at byte {offset}")]
    NonFinitePayload { offset: usize },

    #[error("mask pixel ({x}, {y}) has value {value}; allowed values are 0, 128, 255")]
    MaskConvention { x: u32, y: u32, value: u8 },

    #[error("{path}: expected an 8-bit {expected} image, found {found}")]
    PixelFormat {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
