use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inducing map '{map}' is inconsistent at n = {n}: inverse(forward(n)) = {got}")]
    InconsistentMap { map: String, n: i64, got: i64 },
    #[error("unknown general map rule '{0}'")]
    UnknownMapRule(String),
    #[error("translation step must be nonzero")]
    ZeroStep,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("operator '{0}' is not invertible (inf |w| = 0)")]
    NotInvertible(String),
    #[error("explicit inverse is only available for translation-induced shifts ('{0}')")]
    InverseUnsupported(String),
    #[error("index overflow while iterating map")]
    IndexOverflow,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("family parameter violation: {0}")]
    Family(String),
    #[error("orbit memory guard: total support {total} exceeds cap {cap}")]
    MemoryGuard { total: usize, cap: usize },
    #[error("orbit was recorded without distances to this target")]
    ModeMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
