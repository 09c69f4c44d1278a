use thiserror::Error;

pub type Result<T, E = QelError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QelError {
    #[error("dimension {n} is not a power of two")]
    NotPowerOfTwo { n: usize },

    #[error("invalid dimension {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },

    #[error("row index {row} out of range 1..={n}")]
    RowOutOfRange { row: usize, n: usize },

    #[error("rotation acts on a single row ({row})")]
    RepeatedRow { row: usize },

    #[error("constant gate on row {row} has zero scale")]
    ZeroConstant { row: usize },

    #[error("gate {step} failed: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<QelError>,
    },

    #[error("matrix is singular or near-singular (sigma_min = {sigma_min:e}, floor = {floor:e})")]
    Singular { sigma_min: f64, floor: f64 },

    #[error("{what}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("eps = {eps} outside [0, 1/2)")]
    EpsOutOfRange { eps: f64 },

    #[error("stage {stage} outside 1..={max}")]
    InvalidStage { stage: usize, max: usize },

    #[error("matrix is not orthogonal within tolerance (residual {residual:e}, tol {tol:e})")]
    NotOrthogonal { residual: f64, tol: f64 },

    #[error("inverse-transpose drift {deviation:e} exceeds {tol:e} after {step} gates")]
    InverseDrift { step: usize, deviation: f64, tol: f64 },

    #[error("potential tracker out of sync at step {step}: running value off by {discrepancy:e}")]
    TrackerDesync { step: usize, discrepancy: f64 },

    #[error("rotation at step {step} moved the potential by {delta:e}, above its bound {bound:e}")]
    BoundViolation { step: usize, delta: f64, bound: f64 },

    #[error("invalid lemma parameters: {0}")]
    InvalidLemmaParams(String),

    #[error("lemma instance violates its preconditions: {0}")]
    InvalidInstance(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl QelError {
    pub(crate) fn at_step(self, step: usize) -> Self {
        QelError::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
