use thiserror::Error;

use crate::engine::ActivityState;
use crate::model::ValidationReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("definition is not executable: {0}")]
    InvalidDefinition(ValidationReport),
    #[error("instance `{0}` already exists")]
    DuplicateInstanceId(String),
    #[error("no instance `{0}`")]
    UnknownInstance(String),
    #[error("no activity `{0}`")]
    UnknownActivity(String),
    #[error("no {} data edge from `{from}` to `{to}`", if *.feedback { "feedback" } else { "forward" })]
    UnknownEdge { from: String, to: String, feedback: bool },
    #[error("`{activity}` cannot do that while {state}")]
    IllegalTransition { activity: String, state: ActivityState },
    #[error("`{activity}` cannot emit data while {state}")]
    IllegalProducerState { activity: String, state: ActivityState },
    #[error("feedback target `{target}` is {state}, not active")]
    FeedbackTargetInactive { target: String, state: ActivityState },
    #[error("output of `{activity}` does not match format `{format}`: {reason}")]
    FormatMismatch { activity: String, format: String, reason: String },
    #[error("condition on `{activity}` references field `{field}` missing from its output")]
    MissingField { activity: String, field: String },
    #[error("condition on `{activity}` compares field `{field}` against a literal of another type")]
    ConditionTypeMismatch { activity: String, field: String },
    #[error("stored packet could not be decoded: {0}")]
    UndecodablePacket(String),
    #[error("engine state became inconsistent: {0}")]
    Inconsistent(#[from] ReplayError),
}

impl EngineError {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::InvalidDefinition(_) => "InvalidDefinition",
            EngineError::DuplicateInstanceId(_) => "DuplicateInstanceId",
            EngineError::UnknownInstance(_) => "UnknownInstance",
            EngineError::UnknownActivity(_) => "UnknownActivity",
            EngineError::UnknownEdge { .. } => "UnknownEdge",
            EngineError::IllegalTransition { .. } => "IllegalTransition",
            EngineError::IllegalProducerState { .. } => "IllegalProducerState",
            EngineError::FeedbackTargetInactive { .. } => "FeedbackTargetInactive",
            EngineError::FormatMismatch { .. } => "FormatMismatch",
            EngineError::MissingField { .. } => "MissingField",
            EngineError::ConditionTypeMismatch { .. } => "ConditionTypeMismatch",
            EngineError::UndecodablePacket(_) => "UndecodablePacket",
            EngineError::Inconsistent(_) => "Inconsistent",
        }
    }
}

/// An event that cannot be applied to the state it was replayed onto.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("log does not start with DefinitionLoaded")]
    MissingDefinition,
    #[error("logged definition is not executable: {0}")]
    InvalidDefinition(ValidationReport),
    #[error("expected seq {expected}, found {found}")]
    SeqGap { expected: u64, found: u64 },
    #[error("event belongs to instance `{found}`, not `{expected}`")]
    WrongInstance { expected: String, found: String },
    #[error("event {seq}: {reason}")]
    Inapplicable { seq: u64, reason: String },
}
