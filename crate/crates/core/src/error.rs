use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, tolerance {tol:e})")]
    NotDefinite { min_eig: f64, tol: f64 },
    #[error("conjugating matrix is singular (smallest singular value {0:e})")]
    SingularConjugation(f64),
    #[error("threshold {0:e} discards every eigenvalue of S")]
    EmptyThreshold(f64),
    #[error("system too large for dense treatment: {0}")]
    TooLarge(String),
    #[error("invalid particle sector: {0}")]
    BadSector(String),
    #[error("unknown synthetic instance '{0}'")]
    UnknownSynthetic(String),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("time grid is not equispaced; Toeplitz imputation unavailable")]
    NotToeplitz,
    #[error("estimator bound violated: |{value:e}| exceeds B = {bound:e}")]
    BoundViolation { value: f64, bound: f64 },
    #[error("pair is not definite (max over angles of min eigenvalue is {0:e})")]
    NotDefinitePair(f64),
    #[error("bound is vacuous: chi = {chi:e} exceeds Crawford number {crawford:e}")]
    BoundVacuous { chi: f64, crawford: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("eigenvalue {index} too poorly conditioned: q*chi/d = {ratio:e} > 1")]
    ConditionTooPoor { index: usize, ratio: f64 },
    #[error("gap condition fails at index {index}: gap {gap:e} < required {required:e}")]
    GapTooSmall { index: usize, gap: f64, required: f64 },
    #[error("angle a = {0} outside (0, pi)")]
    BadAngle(f64),
    #[error("initial overlap too small: denominator {0:e} is not positive")]
    OverlapTooSmall(f64),
    #[error("S and perturbed S keep different counts above threshold ({exact} vs {perturbed})")]
    SectorMismatch { exact: usize, perturbed: usize },
    #[error("parse error at byte {offset}: {message}")]
    ParseError { offset: usize, message: String },
    #[error("validation error: {0}")]
    ValidationError(String),
    #[error("config error in field '{field}': {message}")]
    Config { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
