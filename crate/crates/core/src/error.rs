use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A record failed validation; `row` is the zero-based record index.
    #[error("row {row}: {reason}")]
    InvalidData { row: usize, reason: String },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Domain(String),

    #[error("unsupported data: {0}")]
    UnsupportedData(String),

    #[error("chain {chain}: no finite log-posterior after {attempts} initialization attempts")]
    InitializationFailed { chain: usize, attempts: usize },

    #[error("undefined diagnostic: {0}")]
    UndefinedDiagnostic(String),

    #[error("unknown parameter `{name}`; available: {available}")]
    UnknownParameter { name: String, available: String },

    #[error("oracle failure: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
