use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sequence is not strictly increasing at index {index}")]
    NotIncreasing { index: usize },

    #[error("block overlap at level {level}: next base does not exceed the largest multiple")]
    BlockOverlap { level: usize },

    #[error("divisibility fails at index {index}: n_k does not divide n_(k+1)")]
    Divisibility { index: usize },

    #[error("dissociation fails at k = {k}: deficit {deficit}")]
    Dissociation { k: usize, deficit: String },

    #[error("cap violation at index {index}: cap * pi exceeds order + 2")]
    CapViolation { index: usize },

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("enumeration guard exceeded: width {width} > {limit}")]
    Guard { width: usize, limit: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("empty refinement at step {step}")]
    EmptyRefinement { step: usize },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("division by a ball containing zero")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
