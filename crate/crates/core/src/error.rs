use thiserror::Error;

/// Errors raised by the codec, the losses and the tensor container.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("component {0} has no pixels")]
    EmptyComponent(u32),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("value out of domain: {0}")]
    DomainError(String),

    #[error("shift field contains a non-finite value at pixel ({x}, {y})")]
    NonFiniteShift { x: usize, y: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic bytes {0:?}, expected \"CTMP\"")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    BadVersion(u8),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("{found} trailing bytes after payload of {expected} bytes")]
    TrailingBytes { expected: usize, found: usize },

    #[error("annotation line {line}: {message}")]
    Annotation { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch {
            expected: vec![expected.0, expected.1],
            found: vec![found.0, found.1],
        });
    }
    Ok(())
}
