use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Model or configuration parameter outside its admissible range.
    #[error("parameter out of range: {0}")]
    Parameter(String),

    /// Data handed to an operation violates its precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// A textual token (model spec, CSV field, flag value) could not be parsed.
    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("conditional inversion did not converge (u={u}, p={p}, model={model})")]
    Sampler { u: f64, p: f64, model: String },

    /// A row of an input price file is unusable. `row` counts data rows from 1.
    #[error("ingestion error at row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }
}
