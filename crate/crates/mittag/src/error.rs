use thiserror::Error;

/// Errors surfaced by the exact engine.
///
/// Structural misuse (mismatched primes, malformed windows) panics instead;
/// these variants cover conditions a caller can legitimately run into with
/// well-formed inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("tail certificates disagree: {0}")]
    IncompatibleTails(String),

    #[error("radius exponent {radius} is below the tail certificate base {base}")]
    RadiusBelowTailCertificate { radius: String, base: String },

    #[error("no dominant term on the interval: {0}")]
    NotAUnit(String),

    #[error("dominant exponent is zero; map has degree zero")]
    DegreeZero,

    #[error("window coefficients cannot be certified exactly: {0}")]
    WindowNotCertifiable(String),

    #[error("tail certificate covers exponent -1; residue not exactly known")]
    TailObscuresResidue,

    #[error("discs overlap: {0}")]
    OverlappingDiscs(String),

    #[error("duplicate disc centers: {0}")]
    DuplicateCenters(String),

    #[error("radius exponent out of range: {0}")]
    RadiusOutOfRange(String),

    #[error("pole sits on the annulus: {0}")]
    PoleOnAnnulus(String),

    #[error("pole lies inside the domain: {0}")]
    PoleInsideDomain(String),

    #[error("pole lies inside the affinoid: {0}")]
    PoleInsideAffinoid(String),

    #[error("domains do not overlap in a single annulus: {0}")]
    NotAnAnnularOverlap(String),

    #[error("data violates the requested mode: {0}")]
    ModeViolation(String),

    #[error("no invertible correction minor within the scan budget of {budget} levels")]
    NoInvertibleMinor { budget: usize },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
