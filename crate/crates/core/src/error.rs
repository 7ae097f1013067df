use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}) within budget: {context}")]
    QuadratureBudget {
        tol: f64,
        estimate: f64,
        context: String,
    },

    #[error("frequency {requested} exceeds the usable band of the grid (max {limit})")]
    BeyondNyquist { requested: f64, limit: f64 },

    #[error("input is not mean-zero: |mean coefficient| = {0:e}")]
    NotMeanZero(f64),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("certificate failed: {0}")]
    Certificate(String),

    #[error("malformed grid data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
