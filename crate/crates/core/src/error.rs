use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not a frame at this truncation (A = {a:e}, B = {b:e})")]
    NotAFrame { a: f64, b: f64 },
    #[error(
        "ill-conditioned frame operator: stagnated after {iterations} iterations with relative residual {residual:e} (A = {a:e}, B = {b:e})"
    )]
    Conditioning {
        a: f64,
        b: f64,
        iterations: usize,
        residual: f64,
    },
    #[error(
        "Newton iteration did not converge after {iterations} iterations; residual trace {trace:?}"
    )]
    NonConvergence { iterations: usize, trace: Vec<f64> },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient data: only {usable} usable entries")]
    InsufficientData { usable: usize },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("convention self-test failed: {0}")]
    Convention(String),
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("not admissible at this truncation: {0}")]
    NotAdmissible(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
