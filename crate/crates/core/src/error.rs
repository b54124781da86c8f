use num_complex::Complex64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unbalanced or negative replacement matrix: {0}")]
    NonBalancedOrNegativeEntry(String),
    #[error("urn is not large and non-triangular: {0}")]
    NotLargeNonTriangular(String),
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),
    #[error("point {z} is outside the domain: {reason}")]
    DomainError { z: Complex64, reason: &'static str },
    #[error("Newton iteration diverged for w = {w} (last iterate {last}, residual {residual:.3e})")]
    NewtonDivergence {
        w: Complex64,
        last: Complex64,
        residual: f64,
    },
    #[error("singular linear system at order {0}")]
    SingularSystem(usize),
    #[error("moment residual {residual:.3e} at order {n} exceeds {tol:.1e}")]
    ResidualExceeded { n: usize, residual: f64, tol: f64 },
    #[error("{what}: worst value {value:.3e} at x = {x} exceeds {tol:.1e}")]
    ToleranceExceeded {
        what: &'static str,
        x: f64,
        value: f64,
        tol: f64,
    },
    #[error("quadrature error estimate {estimate:.3e} at x = {x} exceeds {tol:.1e}")]
    TailBoundExceeded { x: f64, estimate: f64, tol: f64 },
    #[error("no samples of the required sign for w = {0}")]
    EmptySide(f64),
    #[error("sample set has kind {found}, expected {expected}")]
    WrongKind {
        found: &'static str,
        expected: &'static str,
    },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
