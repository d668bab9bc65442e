use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module of the crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("jet order {have} insufficient, need at least {need} for {what}")]
    Order {
        have: usize,
        need: usize,
        what: &'static str,
    },

    #[error("degeneracy: {0}")]
    Degeneracy(String),

    #[error("rank drop in filtration level F^{level}: rank stayed at {rank} (ambient dim {dim})")]
    RankDrop {
        level: u32,
        rank: usize,
        dim: usize,
    },

    #[error("singular Gram matrix: condition number {cond:.3e} exceeds {max:.3e}")]
    SingularGram { cond: f64, max: f64 },

    #[error("positivity violation: {0}")]
    Positivity(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("ambiguous flat pairing: solution space has dimension {nullity}, expected 1")]
    PairingAmbiguity { nullity: usize },

    #[error("hypothesis not met: {0}")]
    Refused(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
