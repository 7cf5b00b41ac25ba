use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("covariance is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("flavor constraint violated: {0}")]
    FlavorConflict(String),

    #[error("operation does not support flavor {0}")]
    InvalidFlavor(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("word refers to {0}, which was not realized")]
    MissingCopy(String),

    #[error("index-sum formula capped at n <= {max_n} and length <= {max_len}; got n = {n}, length = {len}")]
    TooLarge { n: usize, len: usize, max_n: usize, max_len: usize },

    #[error("pair partitions need an even ground set, got {0}")]
    OddSize(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("word has no P letter")]
    NoP,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("word mixes pair-reflected and generalized random letters")]
    MixedModels,

    #[error("tail bound {bound:e} exceeds requested tolerance {tol:e} at truncation {k}")]
    TailBoundTooLarge { bound: f64, tol: f64, k: usize },

    #[error("polynomial is not self-adjoint")]
    NotSelfAdjoint,

    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NoConvergence(usize),

    #[error("configuration error: {0}")]
    Config(String),
}
