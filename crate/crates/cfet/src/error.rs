use cfet_core::certify::CertifyError;
use cfet_core::engine::EngineError;
use cfet_core::scalar::ParseScalarError;
use cfet_core::scheme::SchemeError;

#[derive(Debug, thiserror::Error)]
pub enum CfetError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scheme document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scalar in {field}: {source}")]
    Scalar { field: String, source: ParseScalarError },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    /// The message starts with "precondition violated".
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CfetError {
    /// 2 for anything the caller got wrong, 3 for numerical breakdowns.
    pub fn exit_code(&self) -> u8 {
        match self {
            CfetError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<CertifyError> for CfetError {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::NonPositiveWeight { .. } | CertifyError::Empty | CertifyError::Inexact => {
                let msg = e.to_string();
                if msg.starts_with("precondition violated") {
                    CfetError::Precondition(msg)
                } else {
                    CfetError::Precondition(format!("precondition violated: {msg}"))
                }
            }
            CertifyError::Shape(_) | CertifyError::TooFewStages { .. } => CfetError::Usage(e.to_string()),
            _ => CfetError::Numerical(e.to_string()),
        }
    }
}

impl From<EngineError> for CfetError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Shape(_)
            | EngineError::Interval
            | EngineError::StepSize
            | EngineError::StepList(_)
            | EngineError::Tolerance
            | EngineError::GridBudget { .. } => CfetError::Usage(e.to_string()),
            EngineError::NonFinite
            | EngineError::KrylovNonConvergence { .. }
            | EngineError::ReferenceNotConverged { .. } => CfetError::Numerical(e.to_string()),
        }
    }
}
