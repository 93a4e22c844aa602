use serde::Serialize;

/// Why a candidate prime in the window was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeDiagnostic {
    pub prime: u64,
    pub failed_clause: FailedClause,
    /// Index (1-based, as in `c_1 … c_k`) of the constant that reduced to a
    /// central element, when that is the failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offending_constant: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedClause {
    /// A reduced constant is a scalar matrix.
    CentralConstant,
    /// The reduced generators do not generate `SL_d(p)`.
    NotGenerating,
    /// Generation could not be decided within the element cap.
    GenerationUndecided,
    /// Every word-map value over `SL_d(p)` is central.
    NoWitness,
    /// The witness search hit the element cap before finding a witness.
    SearchCapExceeded,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("the variable x may not appear in a constant")]
    VariableInConstant,
    #[error("trivial word: the equation reduces to the identity")]
    TrivialWord,
    #[error("invalid generator set: {0}")]
    InvalidGenerators(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("empty prime window ({lo}, {hi}]")]
    EmptyWindow { lo: u64, hi: u64 },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("height bound violated by {word}: height {height} exceeds (dM)^{length}")]
    HeightBoundViolation {
        word: String,
        height: String,
        length: usize,
    },
    #[error("target element not present in the explored ball")]
    TargetNotFound,
    #[error("exploration is partial; the operation needs the whole group")]
    PartialBall,
    #[error("every prime window up to C0 = {c0_max} exhausted without a witness")]
    WindowExhausted {
        c0_max: u64,
        diagnostics: Vec<PrimeDiagnostic>,
    },
    #[error("verification disagreement: {0}")]
    Verification(String),
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
