use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("constraint gram matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularConstraints { condition: f64 },

    #[error("channels are collinear (|<h0,h1>| = {0})")]
    CollinearChannels(f64),

    #[error("lambda bisection did not converge; final bracket [{lo:e}, {hi:e}]")]
    BisectionFailed { lo: f64, hi: f64 },

    #[error("infeasible calibration: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
