use std::path::PathBuf;

/// Errors produced by graph loading, query validation, oracles and index I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected} topics, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("edge ({src}, {dst}) is not incident to vertex {vertex} on the requested side")]
    NotIncident { vertex: u32, src: u32, dst: u32 },

    #[error("enumeration guard exceeded: {what} is {found}, limit is {limit}")]
    GuardExceeded {
        what: &'static str,
        found: usize,
        limit: usize,
    },

    #[error("index file: byte offset {offset}: {msg}")]
    IndexFormat { offset: u64, msg: String },

    #[error("index does not match: {0}")]
    IndexMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
