use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NonHermitianInput { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point domain {found} does not match family domain {expected}")]
    DomainMismatch { expected: String, found: String },

    #[error("test function denominator vanishes at this point (|2 - alpha s| = {modulus:.3e})")]
    SingularDenominator { modulus: f64 },

    #[error("coordinate {value} is not in the open unit disc")]
    NotInDisc { value: String },

    #[error("point {index} is not in the symmetrized bidisc (worst modulus {modulus:.6})")]
    NotInDomain { index: usize, modulus: f64 },

    #[error("points {first} and {second} coincide (chordal distance {distance:.3e})")]
    DuplicatePoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("kernel is not admissible: worst margin {margin:.3e} at {descriptor}")]
    AdmissibilityFailure { descriptor: String, margin: f64 },

    #[error("kernel diagonal entry {index} is not positive ({value:.3e})")]
    DegenerateDiagonal { index: usize, value: f64 },

    #[error("kernel sample lives on a different point set")]
    PointMismatch,

    #[error("resolvent I - A rho(E(x)) is singular (condition estimate {condition:.3e})")]
    SingularResolvent { condition: f64 },

    #[error("colligations do not share one test-function family")]
    FamilyMismatch,

    #[error("colligation is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("invalid sequence specification: {0}")]
    SpecError(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
