use thiserror::Error;

/// Errors across the corpus, learning, and evaluation pipeline.
///
/// Variants are grouped by how a driver should treat them: `Parse`,
/// `Alignment`, `Format`, and `Io` are input problems; `Config` is a bad
/// request (invalid mode, impossible parameter); `Internal` means an
/// invariant we maintain ourselves was violated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("sentence {sentence}, position {position}: {msg}")]
    Alignment {
        sentence: usize,
        position: usize,
        msg: String,
    },

    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn format(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code a command should use for this error:
    /// 1 input, 2 config, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Alignment { .. } | Error::Format { .. } | Error::Io(_) => {
                1
            }
            Error::Config(_) => 2,
            Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
