use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpnError {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),

    #[error("unknown transition `{0}`")]
    UnknownTransition(String),

    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("cannot fire `{transition}` by {amount}: input place `{place}` only enables {enabled}")]
    FiringAmount {
        transition: String,
        place: String,
        amount: Rational,
        enabled: Rational,
    },

    #[error("negative firing amount {0}")]
    NegativeAmount(Rational),

    #[error("resulting marking is negative on {}", .places.join(", "))]
    InfeasibleVector { places: Vec<String> },

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: Rational },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = CpnError> = std::result::Result<T, E>;
