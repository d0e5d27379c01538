use thiserror::Error;

/// Errors raised by the geometric kernels and solvers.
///
/// Grid locations are reported as flat point indices; use
/// [`crate::GridSpec::multi_index`] to recover the per-axis position.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too small for stencil: axis {axis} has {points} points, need at least {required}")]
    GridTooSmall {
        axis: usize,
        points: usize,
        required: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at point {index}")]
    NonFinite { index: usize },

    #[error("singular Hessian at point {index}: |det| = {det:e} below floor")]
    SingularHessian { index: usize, det: f64 },

    #[error("singular metric at point {index}: |det| = {det:e} below floor")]
    SingularMetric { index: usize, det: f64 },

    #[error("operation requires dimension {expected}, got {got}")]
    DimensionError { expected: String, got: usize },

    #[error("Hessian is not Lorentzian at point {index}")]
    NotLorentzian { index: usize },

    #[error("time slices are not spacelike at point {index}")]
    NotSpacelike { index: usize },

    #[error("trimming consumed the domain at leaf {leaf}")]
    EmptyDomain { leaf: usize },

    #[error("CFL violation: time step {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("shift terms too large for the explicit update (contraction {contraction:.3})")]
    ShiftTooLarge { contraction: f64 },

    #[error("domain leaf {leaf} leaves the numerical domain of dependence of the initial leaf")]
    OutsideDomainOfDependence { leaf: usize },

    #[error("iterate {iteration} lost Lorentzian signature at point {index}")]
    SignatureLost { iteration: usize, index: usize },

    #[error("perturbation sup-norm {norm:e} exceeds admissibility bound {bound:e}")]
    InadmissiblePerturbation { norm: f64, bound: f64 },

    #[error("double-null step too large at cell ({i}, {j}): denominator {denominator:.4}")]
    StepTooLarge {
        i: usize,
        j: usize,
        denominator: f64,
    },

    #[error("support touches the domain boundary at point {index}")]
    SupportTouchesBoundary { index: usize },

    #[error("unknown convergence check `{0}`")]
    UnknownCheck(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
