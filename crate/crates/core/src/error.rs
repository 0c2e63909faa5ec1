use crate::domain::ScalarDomain;

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(ScalarDomain, ScalarDomain),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("matrix is not full column rank")]
    RankDeficient,
    #[error("generation failed after {0} attempts")]
    GenerationFailed(u32),
    #[error("repair strategy infeasible: useful-data matrix is rank deficient")]
    InfeasibleStrategy,
    #[error("surviving node contents are inconsistent with the code")]
    InconsistentContents,
    #[error("search space of {candidates} candidates exceeds budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u64 },
    #[error("no feasible repair strategy over this field")]
    NoFeasibleStrategy,
    #[error("no feasible beamforming set over this field")]
    NoFeasibleBeamforming,
    #[error("coding block for piece {piece}, parity {parity} is singular")]
    SingularBlock { piece: usize, parity: usize },
    #[error("eavesdropper channel block for user {user} is singular")]
    SingularChannel { user: usize },
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
