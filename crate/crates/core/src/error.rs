use alloc::string::String;

/// Errors raised by the verification toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input {0} is not finite")]
    NonFinite(f64),
    #[error("denominator must be positive")]
    ZeroDenominator,
    #[error("integer {k} outside [{lo}, {hi})")]
    OutOfRange { k: i64, lo: i64, hi: i64 },
    #[error("grid size {0} must be even and at least 2")]
    InvalidGrid(usize),
    #[error("filter violates the QMF identity: residual {residual:e} at xi = {xi}")]
    QmfViolation { xi: f64, residual: f64 },
    #[error("invalid filter samples: {0}")]
    InvalidSamples(String),
    #[error("{0} has no built-in definition")]
    NotBuiltin(&'static str),
    #[error("level {level} exceeds the cap {cap}")]
    LevelCap { level: u32, cap: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension {0} outside the supported range 1..=3")]
    DimensionCap(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not strictly expansive (eigenvalue modulus {0})")]
    NotExpansive(f64),
    #[error("matrix is not a similarity (eigenvalue moduli {min} .. {max})")]
    NotSimilarity { min: f64, max: f64 },
    #[error("enumeration found {found} coset representatives, expected {expected}")]
    DigitCount { found: usize, expected: usize },
    #[error("digits {0} and {1} are congruent modulo the dilation lattice")]
    CongruentDigits(usize, usize),
    #[error("digit expansion did not terminate within {0} steps")]
    ExpansionDiverged(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("work budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("integer overflow in exact lattice arithmetic")]
    Overflow,
}

pub type Result<T> = core::result::Result<T, Error>;
