use std::path::PathBuf;

use thiserror::Error;

/// One rejected manifest line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestIssue {
    /// 1-based line number in the manifest file (0 when the issue spans records).
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ManifestIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic at byte 0: expected FSEQ, found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported FSEQ version {found} at byte {offset}")]
    VersionMismatch { found: u32, offset: u64 },

    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated { offset: u64, expected: u64, found: u64 },

    #[error("{count} trailing bytes after payload at byte {offset}")]
    TrailingData { offset: u64, count: u64 },

    #[error("non-finite value {value} at byte {offset}")]
    NonFiniteValue { value: f32, offset: u64 },

    #[error("invalid feature sequence: {0}")]
    InvalidSequence(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("manifest has {} problem(s): {}", .0.len(), join_issues(.0))]
    Manifest(Vec<ManifestIssue>),

    #[error("empty input")]
    EmptyInput,

    #[error("calibration set contains only one class ({0}); re-seed or use a stratified split")]
    SingleClass(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corpus hash mismatch: {left} vs {right}")]
    CorpusMismatch { left: String, right: String },

    #[error("unknown pair: stimulus {stimulus_id}, learner {learner_id}")]
    UnknownPair { stimulus_id: String, learner_id: String },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
}

fn join_issues(issues: &[ManifestIssue]) -> String {
    const SHOWN: usize = 5;
    let mut out: Vec<String> = issues.iter().take(SHOWN).map(|i| i.to_string()).collect();
    if issues.len() > SHOWN {
        out.push(format!("... and {} more", issues.len() - SHOWN));
    }
    out.join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
