//! Control-graph shapes and a state-space explorer over the real engine.
//! Shared by the core tests and the acceptance target.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use serde_json::{json, Map, Value as Json};
use wf_core::engine::{ActivityState, EngineEvent, ProcessInstance};
use wf_core::model::{ActivityDef, Comparator, Condition, ControlEdge, ProcessDefinition};
use wf_core::EngineError;

pub const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// Edges always point from a lower to a higher index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub xor: Vec<usize>,
}

impl Dag {
    pub fn successors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect();
        out.sort();
        out
    }

    pub fn predecessors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect();
        out.sort();
        out
    }

    /// XOR splits branch on `x == 1` toward their lower successor; the
    /// higher one is the default.
    pub fn definition(&self) -> ProcessDefinition {
        let activities = (0..self.n)
            .map(|v| {
                let a = ActivityDef::new(NAMES[v]);
                if self.xor.contains(&v) {
                    a.xor()
                } else {
                    a
                }
            })
            .collect();
        let mut control_edges = Vec::new();
        for &(s, t) in &self.edges {
            let mut e = ControlEdge::new(NAMES[s], NAMES[t]);
            if self.xor.contains(&s) {
                e = if self.successors(s)[0] == t {
                    e.when(Condition::new("x", Comparator::Eq, 1))
                } else {
                    e.default_branch()
                };
            }
            control_edges.push(e);
        }
        ProcessDefinition {
            name: "shape".into(),
            version: 1,
            activities,
            control_edges,
            data_edges: vec![],
            formats: vec![],
        }
    }

    /// One variant per vertex with exactly two successors, plus one with
    /// all of them XOR when there are several.
    pub fn xor_variants(&self) -> Vec<Dag> {
        let eligible: Vec<usize> = (0..self.n).filter(|&v| self.successors(v).len() == 2).collect();
        let mut out: Vec<Dag> = eligible.iter().map(|&v| Dag { xor: vec![v], ..self.clone() }).collect();
        if eligible.len() > 1 {
            out.push(Dag { xor: eligible, ..self.clone() });
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every DAG on `n` unlabeled vertices, one representative per isomorphism class.
pub fn non_isomorphic_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect();
        let canon = perms
            .iter()
            .map(|p| {
                let mut es: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (p[a], p[b])).collect();
                es.sort();
                es
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(Dag { n, edges, xor: vec![] });
        }
    }
    out
}

pub fn random_dag<R: Rng>(rng: &mut R, max_n: usize, xor_share: f64) -> Dag {
    let n = rng.random_range(1..=max_n);
    let density = rng.random_range(0.2..0.7);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    let mut dag = Dag { n, edges, xor: vec![] };
    dag.xor = (0..n).filter(|&v| dag.successors(v).len() == 2 && rng.random_bool(xor_share)).collect();
    dag
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Start(usize),
    /// With the value of `x` for XOR splits.
    Terminate(usize, Option<i64>),
    Cancel(usize),
}

impl Action {
    pub fn perform(self, inst: &mut ProcessInstance) -> Result<Vec<EngineEvent>, EngineError> {
        match self {
            Action::Start(v) => inst.start_activity(NAMES[v], None, 0),
            Action::Terminate(v, x) => inst.terminate_activity(NAMES[v], &output(x), 0),
            Action::Cancel(v) => inst.cancel_activity(NAMES[v], 0),
        }
    }
}

pub fn output(x: Option<i64>) -> Map<String, Json> {
    match x {
        Some(x) => json!({ "x": x }).as_object().unwrap().clone(),
        None => Map::new(),
    }
}

/// Every action on every activity, legal or not.
pub fn all_actions(dag: &Dag) -> Vec<Action> {
    let mut out = Vec::new();
    for v in 0..dag.n {
        out.push(Action::Start(v));
        out.push(Action::Cancel(v));
        if dag.xor.contains(&v) {
            out.push(Action::Terminate(v, Some(0)));
            out.push(Action::Terminate(v, Some(1)));
        } else {
            out.push(Action::Terminate(v, None));
        }
    }
    out
}

/// State vector plus the branch each XOR split took (as a target index).
pub type Key = (Vec<ActivityState>, Vec<Option<usize>>);

pub fn key_of(dag: &Dag, inst: &ProcessInstance) -> Key {
    let chosen =
        (0..dag.n).map(|v| inst.chosen_branch(NAMES[v]).map(|t| NAMES.iter().position(|n| *n == t).unwrap())).collect();
    (inst.state_vector(), chosen)
}

pub struct Step<'a> {
    pub before: &'a ProcessInstance,
    pub action: Action,
    pub result: &'a Result<Vec<EngineEvent>, EngineError>,
    pub after: &'a ProcessInstance,
}

/// Breadth-first over all states reachable through `all_actions`. Every
/// attempted action, including rejected ones, is handed to `visit`.
pub fn explore(dag: &Dag, anticipation: bool, mut visit: impl FnMut(Step<'_>)) -> HashMap<Key, ProcessInstance> {
    let (root, _) = ProcessInstance::create(dag.definition(), "x", anticipation, 0).expect("shapes are valid");
    let actions = all_actions(dag);
    let mut seen = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(key_of(dag, &root), root.clone());
    queue.push_back(root);
    while let Some(inst) = queue.pop_front() {
        for &action in &actions {
            let mut next = inst.clone();
            let result = action.perform(&mut next);
            visit(Step { before: &inst, action, result: &result, after: &next });
            if result.is_ok() {
                if let std::collections::hash_map::Entry::Vacant(slot) = seen.entry(key_of(dag, &next)) {
                    slot.insert(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}
