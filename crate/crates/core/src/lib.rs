//! Cooperative workflow engine core: process definitions, the anticipation
//! lifecycle, dataflow between activities, and a discrete-event scheduler
//! for comparing makespans.
//!
//! ```
//! use serde_json::Map;
//! use wf_core::engine::{ActivityState, ProcessInstance};
//! use wf_core::model::{ActivityDef, ControlEdge, ProcessDefinition};
//!
//! let def = ProcessDefinition {
//!     name: "pair".into(),
//!     version: 1,
//!     activities: vec![ActivityDef::new("A"), ActivityDef::new("B")],
//!     control_edges: vec![ControlEdge::new("A", "B")],
//!     data_edges: vec![],
//!     formats: vec![],
//! };
//! let (mut inst, _) = ProcessInstance::create(def, "i1", true, 0).unwrap();
//! inst.start_activity("A", None, 1).unwrap();
//! assert_eq!(inst.state_of("B"), Some(ActivityState::Anticipable));
//! inst.start_activity("B", None, 2).unwrap();
//! inst.terminate_activity("A", &Map::new(), 3).unwrap();
//! assert_eq!(inst.state_of("B"), Some(ActivityState::Executing));
//! ```

pub mod engine;
mod error;
pub mod model;
pub mod router;
pub mod schedule;

pub use error::{EngineError, ReplayError};

/// Milliseconds since the Unix epoch, or simulated time units.
pub type Timestamp = u64;
