use thiserror::Error;

/// Errors raised by discretization, stepping and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid discretization parameter: {0}")]
    InvalidParameter(String),

    /// The interior-penalty form lost positive definiteness (penalty too small).
    #[error("bilinear form is not coercive (sigma0 = {sigma0}): {detail}")]
    NotCoercive { sigma0: f64, detail: String },

    #[error("linear system is singular or indefinite: {0}")]
    Singular(String),

    #[error("symmetric eigensolver failed to converge")]
    EigenConvergence,

    /// A negative fractional power touched a (numerically) zero eigenvalue.
    #[error("negative power {alpha} requested but the operator has a zero eigenvalue")]
    ZeroEigenvalue { alpha: f64 },

    /// Time step exceeds the explicit stability bound `tau * sqrt(lambda_max) < limit`.
    #[error("CFL violation: tau = {tau:e}, tau*sqrt(lambda_max) = {product:.6} >= {limit:.6}")]
    Cfl { tau: f64, product: f64, limit: f64 },

    #[error("point {x} lies outside the domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("fields live on different spaces: {0}")]
    SpaceMismatch(String),

    #[error("level request is not dyadic: {0}")]
    NonDyadic(String),

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
