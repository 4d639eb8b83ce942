use num_bigint::BigInt;
use thiserror::Error;

/// Crate-wide error type. Operations refuse bad inputs with a typed variant
/// rather than panicking; panics are reserved for internal invariant breaks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),

    #[error("finite predicate exhausted at index {0}")]
    SequenceExhausted(usize),

    #[error("{0} is not a member")]
    NotAMember(BigInt),

    #[error("modulus must be >= 1, got {0}")]
    InvalidModulus(BigInt),

    #[error("no congruence period mod {modulus} visible up to index {horizon}")]
    NoCongruencePeriod { modulus: BigInt, horizon: usize },

    #[error("invalid growth profile: {0}")]
    InvalidProfile(String),

    #[error("tail ratio bound violated at index {index}: ratio {ratio}")]
    TailRatioViolated { index: usize, ratio: String },

    #[error("operator must be non-zero here")]
    ZeroOperator,

    #[error("sign classification unresolved: {0}")]
    SignUnresolved(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("gap {delta} is not a multiple of the subsequence step {step}")]
    GapNotMultiple { delta: usize, step: usize },

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("tuple space not certified for this operator tuple at gap {delta}")]
    Uncertified { delta: usize },

    #[error("window too small: {0}")]
    HorizonTooSmall(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("value collision in tuple space: {value} at {lhs:?} and {rhs:?}")]
    Collision {
        value: BigInt,
        lhs: Vec<BigInt>,
        rhs: Vec<BigInt>,
    },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("unknown function {0:?}")]
    UnknownFunction(String),

    #[error("formula is outside the affine fragment: {0}")]
    NotAffine(String),

    #[error("parameter selection failed: {0}")]
    SelectionFailed(String),

    #[error("witness classification failed: {0}")]
    ClassificationFailed(String),

    #[error("new template {0:?} observed after stabilization")]
    TemplateAfterStabilization(String),

    #[error("bad input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
