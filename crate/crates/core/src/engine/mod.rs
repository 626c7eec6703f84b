//! Activity lifecycle and the process instance state machine.

mod actions;
mod condition;
mod event;
mod instance;
mod state;

pub use condition::{condition_holds, evaluate_conditions, ChosenBranch};
pub use event::{Cause, EngineEvent, EventBody};
pub use instance::{EdgeLiveness, InstanceSummary, ProcessInstance, Worklist};
pub use state::{ActivityInstance, ActivityState, InstanceStatus};
