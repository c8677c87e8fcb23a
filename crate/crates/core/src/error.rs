use thiserror::Error;

use crate::model::GeodesicState;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("step size underflow at s = {}, (x, r) = ({}, {})", last.s, last.x, last.r)]
    StepUnderflow { last: GeodesicState },
    #[error("step budget exhausted at s = {}", last.s)]
    StepBudget { last: GeodesicState },
    #[error("curve too short: {0} samples")]
    TooShort(usize),
    #[error("missing signature on segment {0}")]
    MissingSignature(i64),
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("depth {depth} not reached at t = {t}")]
    Depth { depth: i64, t: f64 },
    #[error("verification input rejected: {0}")]
    Verify(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
