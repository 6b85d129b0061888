use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),

    #[error("duplicate activity instance id {0}")]
    DuplicateId(u64),

    #[error("activity instance starts after it completes ({start} > {complete})")]
    InvertedInterval { start: String, complete: String },

    #[error("interval order has no vertices")]
    EmptyOrder,

    #[error("vertex {0} is not part of the interval order")]
    UnknownVertex(u64),

    #[error("brute-force enumeration is limited to {limit} vertices, got {actual}")]
    TooLarge { limit: usize, actual: usize },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid render config: {0}")]
    InvalidConfig(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
