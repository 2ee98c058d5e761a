use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("sweep direction ({0}, {1}) is parallel to a polygon edge")]
    NonGenericDirection(String, String),
    #[error("direction matrix does not span the plane")]
    RankDeficient,
    #[error("unbounded support along the integration direction")]
    UnboundedSupport,
    #[error("smoothness order too low: {0}")]
    SmoothnessTooLow(String),
    #[error("space does not match: {0}")]
    Mismatch(String),
    #[error("function not evaluable: {0}")]
    NotEvaluable(String),
    #[error("linear solve did not converge: residual {residual:e} exceeds {bound:e}")]
    NonConvergence { residual: f64, bound: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
