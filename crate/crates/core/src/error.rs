use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid valuation: {0}")]
    InvalidValuation(String),
    #[error("infeasible cut: requested {requested} but only {remaining} remains")]
    InfeasibleCut { requested: String, remaining: String },
    #[error("protocol structure violated: {0}")]
    ProtocolStructure(String),
    #[error("transcript is not finished")]
    UnfinishedTranscript,
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("reduction contract violated: {0}")]
    ReductionContract(String),
    #[error("allocation is not a partition of the cake: {0}")]
    Structural(String),
    #[error("program exceeded its declared query bound of {bound}")]
    QueryBound { bound: usize },
    #[error("protocol contract violated: {0}")]
    ProtocolContract(String),
    #[error("lipschitz bound violated: {0}")]
    Lipschitz(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
