use thiserror::Error;

/// Errors raised by model validation, the engines and the derived quantities.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model list is empty")]
    EmptyModels,

    #[error("expected {expected} models, got {got}")]
    ModelCount { expected: String, got: usize },

    #[error("grid too coarse: n_y = {n_y}, n_z = {n_z} (need at least 16 points per axis)")]
    GridTooCoarse { n_y: usize, n_z: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model {index} has a nonzero shift; use the shifted wrappers")]
    ShiftedModel { index: usize },

    #[error("grid does not cover the query point (y = {y}, z = {z})")]
    OutOfCoverage { y: f64, z: f64 },

    #[error("expected a {expected} grid, got a {got} grid")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("order mismatch: expected n = {expected}, got n = {got}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("conditioning value {value} has marginal density {marginal:e}; slice is degenerate")]
    DegenerateSlice { value: f64, marginal: f64 },

    #[error("integrand is not finite at ({y}, {z})")]
    NonFinite { y: f64, z: f64 },

    #[error("state space of {states} outcomes exceeds the enumeration limit {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
