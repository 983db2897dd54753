use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("degree mismatch: expected {expected}, got {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("degree overflow: {left} + {right} exceeds ambient dimension {dim}")]
    DegreeOverflow { left: usize, right: usize, dim: usize },

    #[error("ambient dimension {0} is outside the supported range 1..=16")]
    UnsupportedDimension(usize),

    #[error("interior product of a degree-0 tensor")]
    InteriorOfScalar,

    #[error("comass optimizer did not converge after {iterations} iterations (last update norm {update_norm:e})")]
    NonConvergence { iterations: usize, update_norm: f64 },

    #[error("finite-difference stencil at {point:?} with step {step:e} touches the singular locus")]
    StencilOnSingularLocus { point: Vec<f64>, step: f64 },

    #[error("point {0:?} lies on the singular locus")]
    SingularPoint(Vec<f64>),

    #[error("inadmissible cutoff parameters: {0}")]
    Inadmissible(String),

    #[error("t = {t} is outside [0, tan theta] = [0, {tan_theta}]")]
    OutOfRange { t: f64, tan_theta: f64 },

    #[error("plane dimension n = {0} must be at least 3")]
    PlaneDimensionTooSmall(usize),

    #[error("no admissible parameter: {0}")]
    NoAdmissibleParameter(String),

    #[error("basis is rank deficient: smallest singular value {smallest:e}, largest {largest:e}")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("frame is not orthonormal (Gram defect {0:e})")]
    NotOrthonormal(f64),

    #[error("the two planes coincide; complements are empty")]
    EmptyComplements,

    #[error("angle budget violated: minimal principal angle {angle} does not exceed 2*theta = {budget}")]
    AngleBudget { angle: f64, budget: f64 },

    #[error("coordinate-plane sum needs c >= 2: for c = 1 the form dx + dy has comass sqrt(2) > 1")]
    CoordinatePlaneDegree,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scaling function has |f| = {value} > 1 at {point:?}")]
    ScaleTooLarge { value: f64, point: Vec<f64> },

    #[error("displacement y = {y} reaches the focal radius {focal:e}")]
    BeyondFocalRadius { y: f64, focal: f64 },

    #[error("surface parameterization is not an immersion at {0:?}")]
    NotImmersion(Vec<f64>),

    #[error("degenerate simplex (volume {0:e})")]
    DegenerateSimplex(f64),

    #[error("quadrature node {0:?} lies on the singular locus of the field")]
    QuadratureNodeOnSingularLocus(Vec<f64>),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
