use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("non-finite sample in field at index {index}")]
    NonFiniteSample { index: usize },

    #[error("interface margin violated: {0}")]
    Margin(String),

    #[error("forcing needs the auxiliary field `{0}` but none was supplied")]
    MissingAux(&'static str),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("solution became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid stepper configuration: {0}")]
    Stepper(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("schema version mismatch: expected {expected}, found {found}")]
    Schema { expected: u32, found: u32 },

    #[error("usage: {0}")]
    Usage(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
