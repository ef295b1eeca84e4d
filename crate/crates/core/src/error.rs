use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution invariant failed; `pointer` is a JSON pointer into the spec document.
    #[error("invalid distribution at {pointer}: {reason}")]
    InvalidDistribution { pointer: String, reason: String },

    #[error("total mass {total} differs from 1 by more than 1e-12")]
    MassNotNormalized { total: f64 },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid interval: lo={lo} must be below hi={hi}")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("empty conditional: P(X <= c) = {p} leaves one side without mass")]
    EmptyConditional { p: f64 },

    #[error("resolution must be positive")]
    ZeroResolution,

    #[error("node limit exceeded: {requested} nodes requested, limit {limit}")]
    NodeLimit { requested: usize, limit: usize },

    #[error("order n={n} outside 1..={cap}")]
    InvalidOrder { n: usize, cap: usize },

    #[error("weight must be nonnegative: chi[{index}] = {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("psi is not centred: mean {mean} exceeds 1e-10 (pass the projection flag to centre it)")]
    NotZeroMean { mean: f64 },

    #[error("vector does not sum to zero: sum {sum} exceeds 1e-10")]
    NotZeroSum { sum: f64 },

    #[error("enumeration needs {required} summand evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("weight exponent must exceed -1, got {0}")]
    InvalidExponent(f64),

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
