use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Split;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(
        "line count mismatch: {} has {diff_lines} lines but {} has {msg_lines}",
        diff_path.display(),
        msg_path.display()
    )]
    LineCountMismatch {
        diff_path: PathBuf,
        diff_lines: usize,
        msg_path: PathBuf,
        msg_lines: usize,
    },

    #[error("{}: file is empty", .0.display())]
    EmptyFile(PathBuf),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("length mismatch: {candidates} candidates vs {references} references")]
    LengthMismatch {
        candidates: usize,
        references: usize,
    },

    #[error("empty reference sequence")]
    EmptyReference,

    #[error("empty token sequence")]
    EmptySequence,

    #[error("n-gram order {0} outside 1..=4")]
    InvalidOrder(usize),

    #[error("no cleaned message matched any record of the raw dump; wrong dump file?")]
    NoProvenanceMatches,

    #[error("filtering left the {0} split empty")]
    EmptyFilterResult(Split),

    #[error("requested {requested} samples but the mapping holds {available} entries")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("alignment: {0}")]
    Alignment(String),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 1 for usage or configuration
    /// problems, 2 for data and structural problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}
