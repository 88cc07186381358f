use thiserror::Error;

/// Errors raised while validating instances or preparing a solve.
///
/// Infeasibility is not an error: solvers report it through empty solution
/// sets or `None` results.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input sequence is empty")]
    EmptyInput,

    #[error("element at position {0} is not finite")]
    NonFinite(usize),

    #[error("subset size {n} is invalid for a superset of {len} elements")]
    BadSubsetSize { n: usize, len: usize },

    #[error("index bounds are invalid: {0}")]
    BadBounds(String),

    #[error("target range has min > max in dimension {0}")]
    EmptyRange(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("instance is malformed: {0}")]
    BadInstance(String),

    #[error("target table would hold {rows} rows, above the cap of {cap}")]
    TargetRowCap { rows: u128, cap: usize },

    #[error("column {col} needs {bits} bits, above the 63-bit field limit")]
    FieldOverflow { col: usize, bits: u32 },

    #[error("packed value {value} does not fit the {bits}-bit field of column {col}")]
    PackOverflow { col: usize, bits: u32, value: i64 },

    #[error("search space of {0} subsets exceeds the brute-force guard")]
    OracleGuard(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
