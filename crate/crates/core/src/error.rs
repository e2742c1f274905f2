use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported constellation geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("constellation table line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error("non-finite gradient in {term}")]
    NonFiniteGradient { term: &'static str },
    #[error("training diverged at step {step}: loss = {loss}")]
    Diverged { step: usize, loss: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
