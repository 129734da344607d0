use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cell right-hand side has mean {mean:e}, above solvability tolerance {tol:e}")]
    SolvabilityViolation { mean: f64, tol: f64 },

    #[error("spectra live on different periodicity cells")]
    CellMismatch,

    #[error("spectra have different mode bounds ({0} vs {1})")]
    ModeMismatch(usize, usize),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("Green kernel is singular at r = 0 in dimension {0}")]
    SingularEvaluation(usize),

    #[error("Nystrom system is numerically singular (pivot {pivot:e} at column {column})")]
    SingularSystem { pivot: f64, column: usize },

    #[error("linear solve residual {residual:e} exceeds {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("scattering amplitude violates flux conservation by {defect:e} (tolerance {tol:e})")]
    FluxDefect { defect: f64, tol: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("point {0} lies outside the grid")]
    OutOfDomain(f64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("operation requires a plane-wave expansion")]
    WrongProblemKind,

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("dense system of {requested} unknowns exceeds cap {cap}")]
    ResourceCap { requested: usize, cap: usize },

    #[error("i/o failure: {0}")]
    IoFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
