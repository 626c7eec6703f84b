use pbio::FormatDescriptor;
use serde::{Deserialize, Serialize};
use serde_json::Number;
use thiserror::Error;

/// Static task graph of a workflow process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessDefinition {
    pub name: String,
    #[serde(default)]
    pub version: u64,
    pub activities: Vec<ActivityDef>,
    #[serde(default)]
    pub control_edges: Vec<ControlEdge>,
    #[serde(default)]
    pub data_edges: Vec<DataEdge>,
    #[serde(default)]
    pub formats: Vec<FormatDescriptor>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    #[default]
    And,
    Xor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityDef {
    pub name: String,
    #[serde(default, rename = "split")]
    pub split_kind: SplitKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignee: Option<String>,
}

impl ActivityDef {
    pub fn new(name: impl Into<String>) -> Self {
        ActivityDef { name: name.into(), split_kind: SplitKind::And, description: String::new(), assignee: None }
    }

    pub fn xor(mut self) -> Self {
        self.split_kind = SplitKind::Xor;
        self
    }

    pub fn assigned_to(mut self, actor: impl Into<String>) -> Self {
        self.assignee = Some(actor.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlEdge {
    #[serde(rename = "from")]
    pub source: String,
    #[serde(rename = "to")]
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    #[serde(default, rename = "default", skip_serializing_if = "std::ops::Not::not")]
    pub is_default: bool,
}

impl ControlEdge {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        ControlEdge { source: source.into(), target: target.into(), condition: None, is_default: false }
    }

    pub fn when(mut self, condition: Condition) -> Self {
        self.condition = Some(condition);
        self
    }

    pub fn default_branch(mut self) -> Self {
        self.is_default = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub fn is_ordering(self) -> bool {
        !matches!(self, Comparator::Eq | Comparator::Ne)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(Number),
    Text(String),
}

/// Flat comparison of one output field against a literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub field: String,
    pub op: Comparator,
    #[serde(rename = "value")]
    pub literal: Literal,
}

impl Condition {
    pub fn new(field: impl Into<String>, op: Comparator, literal: impl Into<Literal>) -> Self {
        Condition { field: field.into(), op, literal: literal.into() }
    }
}

impl From<i64> for Literal {
    fn from(v: i64) -> Self {
        Literal::Number(v.into())
    }
}

impl From<&str> for Literal {
    fn from(v: &str) -> Self {
        Literal::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataEdge {
    #[serde(rename = "from")]
    pub producer: String,
    #[serde(rename = "to")]
    pub consumer: String,
    pub format: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub feedback: bool,
}

impl DataEdge {
    pub fn new(producer: impl Into<String>, consumer: impl Into<String>, format: impl Into<String>) -> Self {
        DataEdge { producer: producer.into(), consumer: consumer.into(), format: format.into(), feedback: false }
    }

    pub fn feedback(mut self) -> Self {
        self.feedback = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefinitionError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown key `{key}` at line {line}, column {column}")]
    UnknownKey { key: String, line: usize, column: usize },
}

impl ProcessDefinition {
    /// Parses a JSON definition document. Only syntax is checked here; see
    /// [`crate::validate_definition`] for the structural rules.
    pub fn parse(document: &str) -> Result<ProcessDefinition, DefinitionError> {
        serde_json::from_str(document).map_err(|e| {
            let (line, column) = (e.line(), e.column());
            let message = e.to_string();
            match unknown_key(&message) {
                Some(key) => DefinitionError::UnknownKey { key, line, column },
                None => DefinitionError::Syntax { line, column, message },
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("definitions always serialize")
    }

    pub fn activity(&self, name: &str) -> Option<&ActivityDef> {
        self.activities.iter().find(|a| a.name == name)
    }

    pub fn format(&self, name: &str) -> Option<&FormatDescriptor> {
        self.formats.iter().find(|f| f.name == name)
    }

    /// The data edge leaving `producer` toward `consumer` with the given direction.
    pub fn data_edge(&self, producer: &str, consumer: &str, feedback: bool) -> Option<&DataEdge> {
        self.data_edges.iter().find(|e| e.producer == producer && e.consumer == consumer && e.feedback == feedback)
    }
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_owned())
}
