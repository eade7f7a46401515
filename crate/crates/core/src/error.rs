use thiserror::Error;

use crate::verify::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("invalid symbol {symbol} for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: u32, alphabet: u32 },
    #[error("instance too large: {what} (limit {limit})")]
    InstanceTooLarge { what: String, limit: usize },
    #[error("round budget exhausted after {rounds} resamplings")]
    RoundBudgetExhausted { rounds: usize, last: Option<Box<Violation>> },
    #[error("retry budget exhausted after {0} attempts")]
    RetryBudgetExhausted(usize),
    #[error("search budget exhausted")]
    BudgetExhausted,
    #[error("plan infeasible: {0}")]
    PlanInfeasible(String),
    #[error("code supplies {available} codewords, {needed} needed")]
    CodeUndersupply { available: u128, needed: u128 },
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("verification gate failed: {0}")]
    GateFailed(Box<Violation>),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
