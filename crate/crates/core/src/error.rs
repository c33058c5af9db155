use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ordering error at line {line}: {msg}")]
    Ordering { line: usize, msg: String },

    #[error("non-finite value at line {line}: {msg}")]
    Value { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("out-of-sequence sample: expected index {expected}, got {got}")]
    Sequencing { expected: u64, got: u64 },

    #[error("non-finite sample at index {0}")]
    NonFinite(u64),

    #[error("report error: {0}")]
    Report(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse error classes, used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse = 2,
    Config = 3,
    InsufficientData = 4,
    Sequencing = 5,
    Value = 6,
    Report = 7,
    Io = 8,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse { .. } | Error::Ordering { .. } | Error::Json(_) => ErrorCategory::Parse,
            Error::Value { .. } | Error::NonFinite(_) => ErrorCategory::Value,
            Error::Config(_) => ErrorCategory::Config,
            Error::InsufficientData(_) => ErrorCategory::InsufficientData,
            Error::Sequencing { .. } => ErrorCategory::Sequencing,
            Error::Report(_) => ErrorCategory::Report,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }

    pub(crate) fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_string(),
            source,
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCategory::Parse => "parse",
            ErrorCategory::Config => "config",
            ErrorCategory::InsufficientData => "insufficient-data",
            ErrorCategory::Sequencing => "sequencing",
            ErrorCategory::Value => "value",
            ErrorCategory::Report => "report",
            ErrorCategory::Io => "io",
        };
        f.write_str(s)
    }
}
