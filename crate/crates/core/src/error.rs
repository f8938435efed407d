use thiserror::Error;

/// Errors raised by the geometric constructions and the scenario harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),
    #[error("direction is not timelike (det = {det:e})")]
    NotTimelike { det: f64 },
    #[error("linear map is not an orientation-preserving isometry (residual {residual:e})")]
    InvalidFrame { residual: f64 },
    #[error("domain reduction exceeded {cap} steps at z = {z}")]
    ReductionFailure { z: String, cap: usize },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("frame is not orthonormal and oriented (residual {residual:e})")]
    Frame { residual: f64 },
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("endomorphism is not positive definite (min eigenvalue {min_eig:e})")]
    Degenerate { min_eig: f64 },
    #[error("periods {periods:?} are not in 2πZ: no trivializing angle exists")]
    Obstruction { periods: [f64; 4] },
    #[error("section is not an isometry for the pulled back metric (residual {residual:e})")]
    InvalidSection { residual: f64 },
    #[error("induced metric is not positive definite at {at}")]
    NotSpacelike { at: String },
    #[error("unit normal is not timelike at {at}")]
    NormalNotTimelike { at: String },
    #[error("left projection could not be inverted near {at}")]
    ProjectionDegenerate { at: String },
    #[error("id + J B is singular (|det| = {det:e}); tr b ≠ −2 condition violated")]
    TraceCondition { det: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
