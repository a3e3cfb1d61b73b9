use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid count: {0}")]
    InvalidCount(&'static str),
    #[error("invalid interval [{lower}, {upper}]: bounds must be finite with lower < upper")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("{context}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("system with {rows} rows and {cols} columns is underdetermined")]
    Underdetermined { rows: usize, cols: usize },
    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },
    #[error("unknown filter `{0}`")]
    UnknownFilter(alloc::string::String),
    #[error("invalid filter parameter: {0}")]
    InvalidFilterParameter(&'static str),
    #[error("point {value} at index {index} lies outside the filter domain")]
    OutsideDomain { index: usize, value: f64 },
    #[error("non-finite input at index {0}")]
    NonFinite(usize),
    #[error("graph too large for the dense oracle: {nodes} nodes (limit {limit})")]
    GraphTooLarge { nodes: usize, limit: usize },
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("propagation plan mismatch: {0}")]
    PlanMismatch(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("empty node mask")]
    EmptyMask,
    #[error("label {label} at node {node} is out of range for {classes} classes")]
    InvalidLabel {
        node: usize,
        label: usize,
        classes: usize,
    },
    #[error("edge list line {line}: {reason}")]
    MalformedLine { line: usize, reason: &'static str },
}
