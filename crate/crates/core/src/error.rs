use thiserror::Error;

use crate::instance::Violation;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: malformed token {token:?}")]
    Malformed { line: usize, column: usize, token: String },
    #[error("line {line}: row {row} has {found} entries, expected {expected}")]
    RowLength { line: usize, row: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: {message}")]
    Invalid { line: usize, column: usize, message: String },
    #[error("unexpected end of input while reading {what}")]
    UnexpectedEof { what: &'static str },
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("invalid range [{lo}, {hi}]")]
    BadRange { lo: i64, hi: i64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("window [{sw}, {ew}] is invalid for {n} facilities")]
    BadWindow { sw: usize, ew: usize, n: usize },
    #[error("window of {size} facilities exceeds the {limit}-facility limit of the {backend} backend")]
    Capacity { size: usize, limit: usize, backend: &'static str },
    #[error("betweenness assignment does not encode a linear order")]
    Integrity,
    #[error("positions {i} and {j} are not ordered (need i < j)")]
    BadPair { i: usize, j: usize },
    #[error("a swap needs two distinct facilities (got {0} twice)")]
    SameFacility(usize),
    #[error("window {sw}..={ew}: {source}")]
    InWindow { sw: usize, ew: usize, source: Box<SolveError> },
    #[error("unsupported format {0:?}")]
    Format(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{name} = {value}: {reason}")]
    Invalid { name: &'static str, value: String, reason: &'static str },
}
