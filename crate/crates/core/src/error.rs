use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("beta must be positive for the walk representation (got {0}); use the direct enumeration or stretch DP for beta = 0")]
    NonPositiveBeta(f64),

    #[error("{what}: requested size {requested} exceeds the budget {limit}")]
    BudgetExceeded {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("point ({h0}, {h1}) lies outside the cumulant domain |h| < {half_beta}")]
    OutsideDomain { h0: f64, h1: f64, half_beta: f64 },

    #[error("{what} did not converge (last two values {last} and {previous})")]
    NoConvergence {
        what: &'static str,
        last: f64,
        previous: f64,
    },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
