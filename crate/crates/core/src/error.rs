//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the exact engine.
///
/// Failed *predicates* (a module is not Koszul, a radical condition does
/// not hold, ...) are not errors; they are verdicts carrying witnesses.
/// `Error` is reserved for malformed inputs and for requests that the
/// configured bounds cannot answer.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("scalars from different fields in one computation: {0} vs {1}")]
    FieldMismatch(String, String),

    #[error("subspaces live in different ambient spaces: dim {0} vs dim {1}")]
    AmbientMismatch(usize, usize),

    #[error("{0}")]
    BadMatrix(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("bad quiver: {0}")]
    BadQuiver(String),

    #[error("bad relation: {0}")]
    BadRelation(String),

    #[error("algebra validation failed: {0}")]
    ValidationFail(String),

    #[error("operation needs degree {needed} but the table is bounded at {bound}")]
    TruncationExceeded { needed: usize, bound: usize },

    #[error("operation requires {expected} mode, table is {found}")]
    ModeMismatch { expected: &'static str, found: &'static str },

    #[error("vector outside its ambient space: {0}")]
    BadVector(String),

    #[error("bad module data: {0}")]
    BadModule(String),

    #[error("bad morphism data: {0}")]
    BadMorphism(String),

    #[error("map K -> M is not injective at {0}")]
    NotInjective(String),

    #[error("map M -> N is not surjective at {0}")]
    NotSurjective(String),

    #[error("sequence not exact at the middle term: {0}")]
    NotExactAtMiddle(String),

    #[error("radical condition fails: {0}")]
    ConditionFails(String),

    #[error("audit precondition not certified: {0}")]
    PreconditionNotCertified(String),

    #[error("minimal Horseshoe diagram not established: {0}")]
    MhlNotEstablished(String),

    #[error("custom delta table has no entry for n = {0}")]
    ProfileExhausted(usize),

    #[error("delta profile must be strictly increasing: delta({n}) = {value} after {prev}")]
    ProfileNotIncreasing { n: usize, value: usize, prev: usize },

    #[error("random generation exhausted its resampling budget ({0} attempts)")]
    GenerationFailed(u32),

    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
