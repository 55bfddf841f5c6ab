use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("denominator pole: {0}")]
    DenominatorPole(String),
    #[error("series did not converge: {0}")]
    NonConvergent(String),
    #[error("degree bound exceeded: {0}")]
    DegreeOverflow(String),
    #[error("truncation error: {0}")]
    TruncationError(String),
    #[error("exact mode unsupported: {0}")]
    ExactModeUnsupported(String),
    #[error("oracle failure: {0}")]
    OracleFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
