use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |K - K*| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigenvalue {eigenvalue} lies outside [0, 1] beyond tolerance {tolerance:e}")]
    SpectrumOutOfRange { eigenvalue: f64, tolerance: f64 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenSolverFailed { dim: usize },

    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },

    #[error("quadrature order must be at least 1")]
    ZeroOrder,

    #[error("ground set of size {n} exceeds the enumeration limit {limit}")]
    GroundSetTooLarge { n: usize, limit: usize },

    #[error("index {index} is outside a ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("count blocks overlap at index {index}")]
    OverlappingBlocks { index: usize },

    #[error("symbol support is not a bounded interval")]
    UnboundedSupport,

    #[error("invalid piecewise symbol: {0}")]
    BadSymbol(String),

    #[error("Fock vectors live on different split spaces")]
    SplitMismatch,

    #[error("coherent inner product formulas disagree: {first} vs {second}")]
    FormulaMismatch { first: String, second: String },

    #[error("operator is singular or ill-conditioned (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("kernel is not a projector: max |K^2 - K| = {residual:e}")]
    NotAProjector { residual: f64 },

    #[error("sampler projection norm underflowed ({norm:e})")]
    NumericalDegeneracy { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
