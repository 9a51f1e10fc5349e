use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("dimension {0} must be even")]
    OddDimension(usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("expected a pure grade-{expected} element")]
    WrongGrade { expected: usize },
    #[error("input is not antisymmetric: residual {0:e}")]
    NotSkew(f64),
    #[error("metric is not positive definite at {0:?}")]
    NotPositiveDefinite(Vec<f64>),
    #[error("metric is not symmetric at {point:?}: residual {residual:e}")]
    NotSymmetric { point: Vec<f64>, residual: f64 },
    #[error("torsion decomposition left a residual {0:e} outside grades 1 and 3")]
    DecompositionResidual(f64),
    #[error("chart is not a periodic box")]
    NotPeriodic,
    #[error("grid needs at least 4 points per axis, got {0}")]
    GridTooSmall(usize),
    #[error("memory cap exceeded: {needed} fiber values > cap {cap}")]
    MemoryCap { needed: usize, cap: usize },
    #[error("Krylov exponential did not converge: {0}")]
    Krylov(String),
    #[error("geodesic integration failed: {0}")]
    Geodesic(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("only {0} batches survived, need at least 16")]
    TooFewBatches(usize),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
