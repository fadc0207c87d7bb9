use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spherical angles are singular: |sin(zeta_{index})| = {sine:e}")]
    SingularAngles { index: usize, sine: f64 },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("vector is not orthogonal to the tangent (inner product {inner:e})")]
    NonOrthogonal { inner: f64 },
    #[error("normal plane intersects a base of the prism")]
    SliceHitsBase,
    #[error("cross-section is empty")]
    EmptySection,
    #[error("cross-section is unbounded")]
    UnboundedSection,
    #[error("unbounded domain needs an explicit truncation range")]
    MissingTruncation,
    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },
    #[error("inverted integration bounds")]
    InvertedBounds,
    #[error("degenerate polygon (area {area:e})")]
    DegeneratePolygon { area: f64 },
    #[error("Jacobian determinant changes sign on the section (minimum {min:e})")]
    JacobianSignViolation { min: f64 },
    #[error("quadrature did not converge after {levels} refinement levels")]
    NonConvergence { levels: usize },
    #[error("Gram matrix is singular (condition number {condition:e})")]
    SingularGram { condition: f64 },
    #[error("section has zero mass")]
    ZeroMass,
    #[error("state is outside the admissible domain: {0}")]
    OutOfDomain(String),
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepSizeUnderflow { s: f64, h: f64 },
    #[error("inadmissible start: {0}")]
    InadmissibleStart(String),
    #[error("matrix is not a rotation (defect {defect:e})")]
    NonOrthogonalRotation { defect: f64 },
    #[error("helix pitch b must be positive")]
    ZeroPitch,
    #[error("a = {a} is outside the searchable regime a < 2r/3 = {limit}")]
    OutOfRegime { a: f64, limit: f64 },
    #[error("truncation at s = {s} does not match the square symmetry: {reason}")]
    IncompatibleTruncation { s: f64, reason: String },
    #[error("{0} is not supported")]
    Unsupported(String),
    #[error("at s = {s}: {source}")]
    AtArclength {
        s: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Strip any `AtArclength` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtArclength { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn at(self, s: f64) -> Error {
        match self {
            e @ Error::AtArclength { .. } => e,
            e => Error::AtArclength { s, source: Box::new(e) },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
