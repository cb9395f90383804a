use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock cutoff {cutoff} too small: {reason}")]
    CutoffTooSmall { cutoff: usize, reason: String },

    #[error("not-vacuum branch is degenerate (probability {probability:e})")]
    DegenerateBranch { probability: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown state family `{0}`")]
    UnknownFamily(String),

    #[error("family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(String),

    #[error("index {index} out of range for {len} messages")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("state collapsed numerically (remaining norm {norm:e})")]
    NumericalCollapse { norm: f64 },

    #[error("state needs {required} amplitudes, budget is {budget}")]
    BudgetExceeded { required: usize, budget: usize },

    #[error("operator is not between 0 and I: {0}")]
    InvalidOperator(String),

    #[error("operator is not a projector (defect {defect:e})")]
    NotAProjector { defect: f64 },

    #[error("typical-set enumeration needs {required} type classes, limit is {limit}")]
    EnumerationTooLarge { required: u128, limit: u128 },
}

impl Error {
    pub(crate) fn cutoff(cutoff: usize, reason: impl Into<String>) -> Self {
        Error::CutoffTooSmall {
            cutoff,
            reason: reason.into(),
        }
    }
}
