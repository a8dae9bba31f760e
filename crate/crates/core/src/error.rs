use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset handling, preprocessing, augmentation, and
/// training.
///
/// The variants are coarse on purpose: callers that need to map failures to
/// process exit codes only have to distinguish argument misuse, I/O trouble,
/// violated data invariants, and numerical breakdown.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's contract (bad shape, ratio out of
    /// range, equal labels passed to a mixer, and so on).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A file could not be read or written.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    /// A file or in-memory dataset failed a structural invariant (bad magic,
    /// truncated payload, label out of range, non-finite sample, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A numeric computation broke down (non-finite loss, degenerate
    /// filter design).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
