use thiserror::Error;

/// Decode and encode failures for the file formats in this crate.
///
/// Parse errors carry the byte offset of the offending input so a corrupt
/// file can be inspected with a hex dump; text formats report line numbers
/// instead.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("payload truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("unexpected trailing data at byte {offset}")]
    Trailing { offset: usize },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("trajectory spec: {0}")]
    Spec(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
