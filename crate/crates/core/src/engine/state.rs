use serde::{Deserialize, Serialize};

use crate::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActivityState {
    Initial,
    Ready,
    Anticipable,
    Executing,
    Anticipating,
    Terminated,
    Cancelled,
}

impl ActivityState {
    pub const ALL: [ActivityState; 7] = [
        ActivityState::Initial,
        ActivityState::Ready,
        ActivityState::Anticipable,
        ActivityState::Executing,
        ActivityState::Anticipating,
        ActivityState::Terminated,
        ActivityState::Cancelled,
    ];

    /// Terminated and Cancelled are absorbing.
    pub fn is_final(self) -> bool {
        matches!(self, ActivityState::Terminated | ActivityState::Cancelled)
    }

    /// States that are still re-derived from the predecessors.
    pub fn is_unstarted(self) -> bool {
        matches!(self, ActivityState::Initial | ActivityState::Ready | ActivityState::Anticipable)
    }

    pub fn is_active(self) -> bool {
        matches!(self, ActivityState::Executing | ActivityState::Anticipating)
    }

    /// Edges of the lifecycle graph.
    pub fn can_become(self, to: ActivityState) -> bool {
        use ActivityState::*;
        matches!(
            (self, to),
            (Initial, Ready | Anticipable | Cancelled)
                | (Ready, Executing | Cancelled)
                | (Anticipable, Ready | Anticipating | Cancelled)
                | (Anticipating, Executing)
                | (Executing, Terminated)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityState::Initial => "Initial",
            ActivityState::Ready => "Ready",
            ActivityState::Anticipable => "Anticipable",
            ActivityState::Executing => "Executing",
            ActivityState::Anticipating => "Anticipating",
            ActivityState::Terminated => "Terminated",
            ActivityState::Cancelled => "Cancelled",
        }
    }
}

impl std::fmt::Display for ActivityState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Runtime record of one activity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityInstance {
    pub name: String,
    pub state: ActivityState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminated_at: Option<Timestamp>,
    /// Set once the activity has entered Anticipating.
    pub anticipated: bool,
}

impl ActivityInstance {
    pub fn new(name: impl Into<String>) -> Self {
        ActivityInstance {
            name: name.into(),
            state: ActivityState::Initial,
            started_at: None,
            terminated_at: None,
            anticipated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceStatus {
    Running,
    Completed,
}
