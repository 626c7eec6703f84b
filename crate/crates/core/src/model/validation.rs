use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::definition::{Literal, ProcessDefinition, SplitKind};
use super::graph::Topology;

/// One broken structural rule of a [`ProcessDefinition`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    EmptyProcess,
    InvalidIdentifier { name: String },
    DuplicateActivity { name: String },
    UnknownEndpoint { from: String, to: String, missing: String },
    DuplicateControlEdge { from: String, to: String },
    CyclicControlFlow { activities: Vec<String> },
    XorWithoutBranches { activity: String, outgoing: usize },
    MissingDefaultBranch { activity: String },
    MultipleDefaultBranches { activity: String },
    MissingCondition { from: String, to: String },
    DefaultWithCondition { from: String, to: String },
    BranchingOnAndSplit { from: String, to: String },
    OrderingOnText { from: String, to: String },
    InvalidFormat { format: String, reason: String },
    DuplicateFormat { format: String },
    UnknownFormat { from: String, to: String, format: String },
    DuplicateDataEdge { from: String, to: String, feedback: bool },
    DataEdgeNotForward { from: String, to: String },
    FeedbackNotBackward { from: String, to: String },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::EmptyProcess => "EmptyProcess",
            Violation::InvalidIdentifier { .. } => "InvalidIdentifier",
            Violation::DuplicateActivity { .. } => "DuplicateActivity",
            Violation::UnknownEndpoint { .. } => "UnknownEndpoint",
            Violation::DuplicateControlEdge { .. } => "DuplicateControlEdge",
            Violation::CyclicControlFlow { .. } => "CyclicControlFlow",
            Violation::XorWithoutBranches { .. } => "XorWithoutBranches",
            Violation::MissingDefaultBranch { .. } => "MissingDefaultBranch",
            Violation::MultipleDefaultBranches { .. } => "MultipleDefaultBranches",
            Violation::MissingCondition { .. } => "MissingCondition",
            Violation::DefaultWithCondition { .. } => "DefaultWithCondition",
            Violation::BranchingOnAndSplit { .. } => "BranchingOnAndSplit",
            Violation::OrderingOnText { .. } => "OrderingOnText",
            Violation::InvalidFormat { .. } => "InvalidFormat",
            Violation::DuplicateFormat { .. } => "DuplicateFormat",
            Violation::UnknownFormat { .. } => "UnknownFormat",
            Violation::DuplicateDataEdge { .. } => "DuplicateDataEdge",
            Violation::DataEdgeNotForward { .. } => "DataEdgeNotForward",
            Violation::FeedbackNotBackward { .. } => "FeedbackNotBackward",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// An empty report means the definition is executable.
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kinds: Vec<&str> = self.violations.iter().map(Violation::kind).collect();
        write!(f, "{}", kinds.join(", "))
    }
}

/// Names that appear in URLs and file names: letters, digits, `_`, `-`, `.`.
pub fn is_identifier(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 255
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

pub fn validate_definition(def: &ProcessDefinition) -> ValidationReport {
    let mut out = Vec::new();

    if !is_identifier(&def.name) {
        out.push(Violation::InvalidIdentifier { name: def.name.clone() });
    }
    if def.activities.is_empty() {
        out.push(Violation::EmptyProcess);
    }
    let mut names = HashSet::new();
    for a in &def.activities {
        if !is_identifier(&a.name) {
            out.push(Violation::InvalidIdentifier { name: a.name.clone() });
        }
        if !names.insert(a.name.as_str()) {
            out.push(Violation::DuplicateActivity { name: a.name.clone() });
        }
    }

    let mut pairs = HashSet::new();
    for e in &def.control_edges {
        for end in [&e.source, &e.target] {
            if !names.contains(end.as_str()) {
                out.push(Violation::UnknownEndpoint {
                    from: e.source.clone(),
                    to: e.target.clone(),
                    missing: end.clone(),
                });
            }
        }
        if !pairs.insert((e.source.as_str(), e.target.as_str())) {
            out.push(Violation::DuplicateControlEdge { from: e.source.clone(), to: e.target.clone() });
        }
    }

    let topo = Topology::new(def);
    if !topo.is_acyclic() {
        let activities = topo.unordered().into_iter().map(|i| def.activities[i].name.clone()).collect();
        out.push(Violation::CyclicControlFlow { activities });
    }

    check_splits(def, &mut out);
    check_formats(def, &names, &topo, &mut out);

    ValidationReport { violations: out }
}

fn check_splits(def: &ProcessDefinition, out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    for a in &def.activities {
        if !seen.insert(a.name.as_str()) {
            continue;
        }
        let edges: Vec<_> = def.control_edges.iter().filter(|e| e.source == a.name).collect();
        match a.split_kind {
            SplitKind::And => {
                for e in edges.iter().filter(|e| e.condition.is_some() || e.is_default) {
                    out.push(Violation::BranchingOnAndSplit { from: e.source.clone(), to: e.target.clone() });
                }
            }
            SplitKind::Xor => {
                if edges.len() < 2 {
                    out.push(Violation::XorWithoutBranches { activity: a.name.clone(), outgoing: edges.len() });
                }
                match edges.iter().filter(|e| e.is_default).count() {
                    0 => out.push(Violation::MissingDefaultBranch { activity: a.name.clone() }),
                    1 => {}
                    _ => out.push(Violation::MultipleDefaultBranches { activity: a.name.clone() }),
                }
                for e in &edges {
                    let (from, to) = (e.source.clone(), e.target.clone());
                    match (&e.condition, e.is_default) {
                        (Some(_), true) => out.push(Violation::DefaultWithCondition { from, to }),
                        (None, false) => out.push(Violation::MissingCondition { from, to }),
                        (Some(c), false) if c.op.is_ordering() && matches!(c.literal, Literal::Text(_)) => {
                            out.push(Violation::OrderingOnText { from, to })
                        }
                        _ => {}
                    }
                }
            }
        }
    }
}

fn check_formats(def: &ProcessDefinition, names: &HashSet<&str>, topo: &Topology, out: &mut Vec<Violation>) {
    let mut formats = HashMap::new();
    for f in &def.formats {
        if let Err(e) = f.validate() {
            out.push(Violation::InvalidFormat { format: f.name.clone(), reason: e.to_string() });
        }
        if formats.insert(f.name.as_str(), f).is_some() {
            out.push(Violation::DuplicateFormat { format: f.name.clone() });
        }
    }

    let reach = topo.reachability();
    let mut keys = HashSet::new();
    for e in &def.data_edges {
        let (from, to) = (e.producer.clone(), e.consumer.clone());
        let mut endpoints_known = true;
        for end in [&e.producer, &e.consumer] {
            if !names.contains(end.as_str()) {
                endpoints_known = false;
                out.push(Violation::UnknownEndpoint { from: from.clone(), to: to.clone(), missing: end.clone() });
            }
        }
        if !formats.contains_key(e.format.as_str()) {
            out.push(Violation::UnknownFormat { from: from.clone(), to: to.clone(), format: e.format.clone() });
        }
        if !keys.insert((e.producer.as_str(), e.consumer.as_str(), e.feedback)) {
            out.push(Violation::DuplicateDataEdge { from: from.clone(), to: to.clone(), feedback: e.feedback });
        }
        if !endpoints_known {
            continue;
        }
        let (p, c) = (topo.index_of(&e.producer).unwrap(), topo.index_of(&e.consumer).unwrap());
        if e.feedback && !reach[c][p] {
            out.push(Violation::FeedbackNotBackward { from, to });
        } else if !e.feedback && !reach[p][c] {
            out.push(Violation::DataEdgeNotForward { from, to });
        }
    }
}
