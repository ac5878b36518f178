use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a unit vector: norm {norm} (deviation {deviation:e})")]
    NotUnit { norm: f64, deviation: f64 },

    #[error("invalid sphere dimension {0}; need n >= 1")]
    InvalidSphereDimension(usize),

    #[error("polytope has no vertices")]
    EmptyPolytope,

    #[error("ball radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("body is not full-dimensional: affine dimension {found} < {expected}")]
    FlatBody { found: usize, expected: usize },

    #[error("matrix is singular (scaled determinant {0:e})")]
    SingularMatrix(f64),

    #[error("matrix has wrong shape: expected {expected}x{expected}")]
    MatrixShape { expected: usize },

    #[error("clipped region is empty")]
    EmptyIntersection,

    #[error("zero normal: the half-space is all of space or empty")]
    ZeroNormal,

    #[error("objective evaluated to a non-finite value {0}")]
    NonFiniteObjective(f64),

    #[error("objective {0} is not antipodal in the sphere parameter")]
    NotAntipodal(usize),

    #[error("black-box objectives are only supported over ball bodies (body {0})")]
    BlackBoxNeedsBall(usize),

    #[error("epsilon {eps} is not admissible: need 0 < eps < 1 and sqrt(2eps - eps^2)*M < 1 - eps with M = {norm_bound}")]
    InadmissibleEpsilon { eps: f64, norm_bound: f64 },

    #[error("instance needs {expected} {what}, got {got}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
