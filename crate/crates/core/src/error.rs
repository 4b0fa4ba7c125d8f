use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("rank {rank} exceeds extent {extent} in mode {mode}")]
    RankExceedsExtent { mode: usize, rank: usize, extent: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("eigenvalue off the array manifold (cosine argument {0})")]
    OutOfManifold(f64),
    #[error("singular digital weight at subcarrier {m_f}, beam {m_b}")]
    SingularWeights { m_f: usize, m_b: usize },
}
