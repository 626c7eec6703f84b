//! Workflow process definitions: parsing, structural validation and
//! canonical ordering of the control graph.

mod definition;
mod graph;
mod validation;

pub use definition::{
    ActivityDef, Comparator, Condition, ControlEdge, DataEdge, DefinitionError, Literal, ProcessDefinition, SplitKind,
};
pub use graph::{canonical_order, CyclicControlFlow, Topology};
pub use validation::{is_identifier, validate_definition, ValidationReport, Violation};
