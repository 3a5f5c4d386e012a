use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },

    #[error("unknown config key {0:?}")]
    UnknownKey(String),

    #[error("bad value {value:?} for key {key:?}")]
    BadValue { key: String, value: String },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Core(#[from] derham::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
