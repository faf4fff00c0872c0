use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative energy {0}")]
    NegativeEnergy(f64),
    #[error("covariance violates the uncertainty relation (min eigenvalue {0:e})")]
    NonPositiveDefinite(f64),
    #[error("degenerate two-mode form: (a+b)^2 <= 4c^2")]
    DegenerateForm,
    #[error("mode index {index} out of range for {modes} modes")]
    BadModeIndex { index: usize, modes: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cutoff too small: lost mass {lost:e} exceeds {tol:e}")]
    CutoffOverflow { lost: f64, tol: f64 },
    #[error("sum of covariances is singular")]
    SingularSum,
    #[error("covariance cannot be cast to a supported standard form")]
    StandardFormUnavailable,
    #[error("value {value} outside {what}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("finite-difference second derivative is unstable (h: {coarse}, h/2: {fine})")]
    NoisyDerivative { coarse: f64, fine: f64 },
    #[error("generating function evaluated outside its radius at {0}")]
    RadiusViolation(f64),
    #[error("quadrature not converged: {n1} nodes {v1}, {n2} nodes {v2}")]
    QuadratureNonConverged { n1: usize, v1: f64, n2: usize, v2: f64 },
    #[error("covertness constraint is vacuous for eps = 1/2")]
    ConstraintVacuous,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("truncation too small: mass {0:e} at the last index")]
    TruncationTooSmall(f64),
    #[error("convergence condition violated: x = {x} not in [{lo}, 1]")]
    ConvergenceConditionViolated { x: f64, lo: f64 },
    #[error("bracket [{lo}, {hi}] does not straddle the root")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("gain G = 1 makes the gain Fisher information singular")]
    GainAtUnity,
    #[error("no crossing found up to G = {0}")]
    NoCrossing(f64),
    #[error("closed form and channel composition disagree by {0:e}")]
    ClosedFormMismatch(f64),
    #[error("both variances vanish with distinct means")]
    DegenerateVariances,
}

pub type Result<T> = std::result::Result<T, Error>;
