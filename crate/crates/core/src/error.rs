use num_complex::Complex64;
use thiserror::Error;

use crate::weyl::Disk;

/// Violations of the coefficient data model. Each invariant has its own variant
/// so that file parsers can point at the offending entry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoefficientError {
    #[error("grid must start at 0 and contain at least one interval")]
    EmptyGrid,
    #[error("grid not strictly increasing at knot {index} ({prev} >= {next})")]
    GridNotIncreasing { index: usize, prev: f64, next: f64 },
    #[error("grid does not start at 0 (first knot {0})")]
    GridOrigin(f64),
    #[error("{field} has {got} entries, expected {expected} (one per interval)")]
    LengthMismatch { field: &'static str, got: usize, expected: usize },
    #[error("non-finite value in {field} at interval {index}")]
    NonFinite { field: &'static str, index: usize },
    #[error("negative density {value} at interval {index}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("coefficient a at interval {index} has modulus {modulus} > 1")]
    CoefficientRange { index: usize, modulus: f64 },
    #[error("P not positive semidefinite at interval {index} (smallest eigenvalue {min_eigenvalue})")]
    PNotPositive { index: usize, min_eigenvalue: f64 },
    #[error("P not Hermitian at interval {index}")]
    PNotHermitian { index: usize },
    #[error("Q not anti-Hermitian at interval {index} (|Q + Q*| = {defect})")]
    QNotAntiHermitian { index: usize, defect: f64 },
    #[error("trace(jP) = {value} != 0 at interval {index}")]
    TraceJP { index: usize, value: f64 },
    #[error("trace(jQ) = {value} != 0 at interval {index}")]
    TraceJQ { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Coefficients(#[from] CoefficientError),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("degenerate Moebius action: the image row vector vanishes")]
    DegenerateAction,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("coefficient out of range: |a| = {0} > 1")]
    CoefficientRange(f64),
    #[error("length {requested} lies beyond the finite system end {end}")]
    Domain { requested: f64, end: f64 },
    #[error("overflow while propagating (use the log-scaled variant)")]
    Overflow,
    #[error("family violates the Arov normalization: {0}")]
    GaugeViolation(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("spectral point {0} missing from the family")]
    MissingSpectralPoint(Complex64),
    #[error("Weyl disks did not reach radius {tol:e} by l = {l_stop} (last radius {radius:e})", radius = .last.radius)]
    Budget { last: Disk, l_stop: f64, tol: f64 },
    #[error("Riccati step size underflow at l = {0}")]
    StepUnderflow(f64),
    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(Complex64),
    #[error("samples do not settle to a limit (spread {spread:e} > {tol:e})")]
    NoLimit { estimate: Complex64, spread: f64, tol: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
