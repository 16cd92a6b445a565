use thiserror::Error;

/// Errors raised by the matrix-space transforms and their reconstruction formulas.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (min eigenvalue {min}, max eigenvalue {max})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("pole of the gamma function at {0}")]
    Pole(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("order {0} is outside the Wallach set")]
    WallachViolation(String),

    #[error("order {0} is outside the region of absolute convergence")]
    ConvergenceRegion(String),

    #[error("non-finite integrand value encountered")]
    NonFinite,

    #[error("empty cone interval: lower bound is not below upper bound")]
    EmptyInterval,

    #[error("field tail mass {0:e} exceeds the support tolerance")]
    TailMass(f64),

    #[error("point lies outside the grid extent")]
    OutOfExtent,

    #[error("incompatible field parameters: {0}")]
    IncompatibleParams(String),

    #[error("wavelet is not radial (deviation {0:e})")]
    NotRadial(f64),

    #[error("frame is not in V({n},{q})")]
    FrameDimension { n: usize, q: usize },

    #[error("invalid band [{delta}, {lambda}]")]
    BadBand { delta: f64, lambda: f64 },

    #[error("grid does not resolve the wavelet band: {0}")]
    Resolution(String),

    #[error("truncation schedule did not converge: {0}")]
    NoConvergence(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("config error at line {line}: key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown transform `{0}`")]
    UnknownTransform(String),

    #[error("unknown inversion method `{0}`")]
    UnknownMethod(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
