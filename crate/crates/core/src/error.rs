use thiserror::Error;

/// Failure modes shared by every stage of construction, propagation and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("wavefunctions are sampled on different grids")]
    GridMismatch,
    #[error("invalid unit system: {0}")]
    InvalidUnits(String),
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),
    #[error("argument {0} is outside the representable range")]
    DomainOverflow(f64),
    #[error("index {index} exceeds the supported maximum {max}")]
    IndexTooLarge { index: usize, max: usize },
    #[error("time {t} lies outside the tabulated range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },
    #[error("potential has a nonzero imaginary part; a form-invariant packet needs a real potential")]
    ComplexPotential,
    #[error("effective potential is neither confining nor linear on the grid")]
    NotConfining,
    #[error("eigen-solver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("grid too coarse for the potential range: {0}")]
    UnderResolved(String),
    #[error("no motion constraint is known for this potential: {0}")]
    UnsupportedPotential(String),
    #[error("packet support leaves the analysis window: {0}")]
    SupportEscape(String),
    #[error("tridiagonal solve broke down (pivot magnitude {pivot:e})")]
    SolverBreakdown { pivot: f64 },
    #[error("initial packet is not compatible with Dirichlet boundaries (endpoint/peak = {ratio:e})")]
    DirichletViolation { ratio: f64 },
    #[error("only {found} points above the density floor, need {required}")]
    InsufficientSupport { found: usize, required: usize },
    #[error("only {found} snapshots available, need {required}")]
    InsufficientSnapshots { found: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
