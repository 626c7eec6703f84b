//! Plain start-end workflow semantics, written without reference to the
//! engine: an activity may start once every live predecessor is done.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use wf_core::engine::ActivityState;

use super::dags::{Action, Dag, Key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum C {
    Waiting,
    Ready,
    Running,
    Done,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct World {
    s: Vec<C>,
    choice: Vec<Option<usize>>,
}

fn settle(dag: &Dag, w: &mut World) {
    loop {
        let mut changed = false;
        for v in 0..dag.n {
            if !matches!(w.s[v], C::Waiting | C::Ready) {
                continue;
            }
            let preds = dag.predecessors(v);
            let mut dead = 0;
            let mut blocked = false;
            for &p in &preds {
                let is_xor = dag.xor.contains(&p);
                if w.s[p] == C::Skipped || (is_xor && w.choice[p].is_some_and(|c| c != v)) {
                    dead += 1;
                } else if w.s[p] != C::Done {
                    blocked = true;
                }
            }
            let next = if !preds.is_empty() && dead == preds.len() {
                C::Skipped
            } else if blocked {
                C::Waiting
            } else {
                C::Ready
            };
            if next != w.s[v] {
                w.s[v] = next;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

fn step(dag: &Dag, w: &World, action: Action) -> Option<World> {
    let mut w = w.clone();
    match action {
        Action::Start(v) if w.s[v] == C::Ready => w.s[v] = C::Running,
        Action::Cancel(v) if matches!(w.s[v], C::Waiting | C::Ready) => w.s[v] = C::Skipped,
        Action::Terminate(v, x) if w.s[v] == C::Running => {
            w.s[v] = C::Done;
            if dag.xor.contains(&v) {
                let succ = dag.successors(v);
                w.choice[v] = Some(if x == Some(1) { succ[0] } else { succ[1] });
            }
        }
        _ => return None,
    }
    settle(dag, &mut w);
    Some(w)
}

fn key(w: &World) -> Key {
    let states =
        w.s.iter()
            .map(|c| match c {
                C::Waiting => ActivityState::Initial,
                C::Ready => ActivityState::Ready,
                C::Running => ActivityState::Executing,
                C::Done => ActivityState::Terminated,
                C::Skipped => ActivityState::Cancelled,
            })
            .collect();
    (states, w.choice.clone())
}

/// All reachable (state vector, XOR choices) pairs.
pub fn reachable(dag: &Dag) -> HashSet<Key> {
    let mut w = World { s: vec![C::Waiting; dag.n], choice: vec![None; dag.n] };
    settle(dag, &mut w);
    let actions = super::dags::all_actions(dag);
    let mut seen = HashSet::from([w.clone()]);
    let mut queue = VecDeque::from([w]);
    while let Some(w) = queue.pop_front() {
        for &a in &actions {
            if let Some(next) = step(dag, &w, a) {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen.iter().map(key).collect()
}

/// The vector anticipation-on mode shows for a classical one: waiting
/// activities whose live predecessors have all started (and not all
/// finished) read as Anticipable.
pub fn with_anticipation(dag: &Dag, key: &Key) -> Key {
    let (states, choice) = key;
    let mut out = states.clone();
    for v in 0..dag.n {
        if states[v] != ActivityState::Initial {
            continue;
        }
        let mut running = false;
        let mut eligible = true;
        for p in dag.predecessors(v) {
            let is_xor = dag.xor.contains(&p);
            let dead = states[p] == ActivityState::Cancelled || (is_xor && choice[p].is_some_and(|c| c != v));
            if dead {
                continue;
            }
            if is_xor && choice[p].is_none() {
                eligible = false;
            }
            match states[p] {
                ActivityState::Executing => running = true,
                ActivityState::Terminated => {}
                _ => eligible = false,
            }
        }
        if eligible && running {
            out[v] = ActivityState::Anticipable;
        }
    }
    (out, choice.clone())
}
