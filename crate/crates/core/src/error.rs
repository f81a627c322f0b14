use thiserror::Error;

use crate::complex::Simplex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid simplex {0:?}: need 1 to 3 distinct vertices")]
    InvalidSimplex(Vec<u32>),

    #[error("simplex {0} listed more than once")]
    DuplicateSimplex(Simplex),

    #[error("incomplete complex: face {face} of {simplex} is missing or appears later")]
    IncompleteComplex { simplex: Simplex, face: Simplex },

    #[error("non-monotone values: face {face} has value {face_value} > {coface_value} of {coface}")]
    NonMonotone {
        face: Simplex,
        face_value: f64,
        coface: Simplex,
        coface_value: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("simplex budget exceeded: {count} simplices > budget {budget}")]
    BudgetExceeded { count: usize, budget: usize },

    #[error("duplicate points: row {first} and row {second} coincide")]
    DuplicatePoint { first: usize, second: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("oracle size guard exceeded: {0}")]
    OracleScale(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("graph distance undefined: {0}")]
    UndefinedDistance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
