use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller supplied a value outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// Two inputs that must agree on n or m do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The requested size cannot be represented (e.g. lexicographic scores
    /// beyond double precision).
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// A file or text payload does not match the expected format.
    #[error("malformed input: {0}")]
    Format(String),

    /// Exhaustive enumeration would exceed the configured cap.
    #[error("{count} compositions exceed the enumeration cap of {cap}; raise the cap or shrink the instance")]
    CapExceeded { count: u128, cap: u64 },

    /// An exact integer computation does not fit in 128 bits.
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    /// No item pair has a participant that ranks both strictly.
    #[error("concentration parameter is undefined: no item pair has a qualifying participant")]
    AlphaUndefined,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A guaranteed internal invariant failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
