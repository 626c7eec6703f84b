use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("record does not conform to format `{format}`: {reason}")]
    NonConformingRecord { format: String, reason: String },
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("message truncated")]
    TruncatedMessage,
    #[error("malformed descriptor: {0}")]
    MalformedDescriptor(String),
    #[error("invalid utf-8 in {0}")]
    InvalidUtf8(String),
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("value of field `{0}` is not representable in the target type")]
    OverflowingNarrow(String),
    #[error("field `{0}` cannot be converted between these kinds")]
    TypeMismatch(String),
}

impl CodecError {
    pub(crate) fn nonconforming(format: &str, reason: impl Into<String>) -> Self {
        CodecError::NonConformingRecord { format: format.to_owned(), reason: reason.into() }
    }

    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            CodecError::InvalidDescriptor(_) => "InvalidDescriptor",
            CodecError::NonConformingRecord { .. } => "NonConformingRecord",
            CodecError::BadMagic => "BadMagic",
            CodecError::UnsupportedVersion(_) => "UnsupportedVersion",
            CodecError::TruncatedMessage => "TruncatedMessage",
            CodecError::MalformedDescriptor(_) => "MalformedDescriptor",
            CodecError::InvalidUtf8(_) => "InvalidUtf8",
            CodecError::TrailingBytes(_) => "TrailingBytes",
            CodecError::OverflowingNarrow(_) => "OverflowingNarrow",
            CodecError::TypeMismatch(_) => "TypeMismatch",
        }
    }
}
