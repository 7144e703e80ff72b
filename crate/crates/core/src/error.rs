use thiserror::Error;

/// Syntax error produced by [`crate::exprs::parse`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: expected {expected}")]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub expected: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("variable `{0}` is not declared in the (m, n) signature")]
    UndeclaredVariable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("expression is not real-valued: imaginary part {imag:e} at sample {sample}")]
    NotReal { imag: f64, sample: usize },

    #[error("degenerate fibre at t = {t}: {detail}")]
    Degenerate { t: f64, detail: String },

    #[error("no sign change of the defining function along the ray (searched up to radius {radius})")]
    NoSignChange { radius: f64 },

    #[error("fibre is not star-shaped about the origin: {0}")]
    NotStarShaped(String),

    #[error("assumption A2 violated: {0}")]
    A2Violation(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("independent routes disagree: {what} differs by {diff:e} (tolerance {tol:e})")]
    RouteMismatch { what: String, diff: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Newton inversion failed: {0}")]
    Newton(String),

    #[error("Gram matrix is indefinite: pivot {pivot:e} at basis index {index}")]
    Indefinite { pivot: f64, index: usize },

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
