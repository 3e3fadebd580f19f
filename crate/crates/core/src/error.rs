use thiserror::Error;

/// Errors raised by the geometry, map, Jacobi, spectral and rigidity layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is at a projection singularity and cannot be projected onto the manifold")]
    NotProjectable,
    #[error("chart {chart} is degenerate at this point (distance to singular set {margin:.3e})")]
    ChartSingularity { chart: usize, margin: f64 },
    #[error("tangent vectors are based at different points")]
    MixedBasePoints,
    #[error("point is off the manifold (constraint violation {violation:.3e})")]
    OffManifold { violation: f64 },
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("map is not horizontally conformal at this point (residual {residual:.3e})")]
    NotHorizontallyConformal { residual: f64 },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("parallel frame construction failed: {0}")]
    FrameConstructionFailure(String),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("no fiber sampler available for map `{0}`")]
    FiberSamplingUnavailable(String),
    #[error("skew-generator fit is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedFit { condition: f64 },
    #[error("section norm is not constant (relative variation {variation:.3e})")]
    NotConstantNorm { variation: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
