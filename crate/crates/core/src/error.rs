use thiserror::Error;

use crate::sca::SolveResult;

pub type Result<T> = std::result::Result<T, IsacError>;

#[derive(Debug, Error)]
pub enum IsacError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{name} = {value} lies outside [{min}, {max}]")]
    AngleOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// The Fisher information matrix could not be factorized, even with jitter.
    /// Usually means the target geometry is unidentifiable (coincident targets,
    /// zero elevation, or a beamformer that does not illuminate a target).
    #[error("Fisher information matrix is singular")]
    SingularFim,

    #[error("basis matrix is rank deficient (Gram factorization failed)")]
    RankDeficientBasis,

    #[error("projection undefined: {0}")]
    DegenerateProjection(String),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// The iteration budget ran out before the objective settled. The partial
    /// result is kept so callers can still inspect the trace.
    #[error("no convergence after {iterations} iterations (last objective change {last_change:.3e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        result: Box<SolveResult>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
