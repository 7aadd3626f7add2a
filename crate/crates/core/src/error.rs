use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rank mismatch: array has {got} axes, spec has {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite input value")]
    NonFiniteInput,
    #[error("invalid exponent {0}: exponents must lie in (0, inf]")]
    InvalidExponent(f64),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("exponent r must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("not a frame: {0}")]
    NotAFrame(String),
    #[error("unsupported quantization parameter t = {0}; supported values are 0, 1/2, 1")]
    UnsupportedA(f64),
    #[error("axis blocks differ in size: {0} vs {1}")]
    BlockMismatch(usize, usize),
    #[error("memory guard: {entries} coefficients exceed the cap of {cap}")]
    MemoryGuard { entries: usize, cap: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("exponent condition violated: {0}")]
    ExponentViolation(String),
    #[error("trace weight constant is not finite (lattice sums unstable under extension)")]
    InfiniteThetaConstant,
    #[error("trace point is off the grid by {0}")]
    ZOffGrid(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("field file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
