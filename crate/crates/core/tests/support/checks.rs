//! Trace invariants, each checked against the shape alone rather than
//! against engine internals.

#![allow(dead_code)]

use wf_core::engine::{ActivityState, EventBody, ProcessInstance};

use super::dags::{key_of, Action, Dag, Step, NAMES};

/// Strictly increases along every legal transition.
pub fn rank(s: ActivityState) -> u8 {
    match s {
        ActivityState::Initial => 0,
        ActivityState::Anticipable => 1,
        ActivityState::Ready => 2,
        ActivityState::Anticipating => 3,
        ActivityState::Executing => 4,
        ActivityState::Terminated | ActivityState::Cancelled => 5,
    }
}

fn edge_dead(dag: &Dag, inst: &ProcessInstance, from: usize, to: usize) -> bool {
    let (states, chosen) = key_of(dag, inst);
    states[from] == ActivityState::Cancelled || (dag.xor.contains(&from) && chosen[from].is_some_and(|c| c != to))
}

/// Every predecessor reached over a non-dead edge has terminated.
pub fn live_predecessors_done(dag: &Dag, inst: &ProcessInstance, v: usize) -> bool {
    dag.predecessors(v)
        .into_iter()
        .all(|p| edge_dead(dag, inst, p, v) || inst.state_of(NAMES[p]) == Some(ActivityState::Terminated))
}

/// Per-transition checks. Returns the name of the violated property.
pub fn check_step(dag: &Dag, anticipation: bool, step: &Step<'_>) -> Result<(), String> {
    let events = match step.result {
        Err(_) => {
            return if step.after == step.before { Ok(()) } else { Err("rejected action changed state".into()) };
        }
        Ok(events) => events,
    };
    if let Action::Terminate(v, _) = step.action {
        if !live_predecessors_done(dag, step.before, v) {
            return Err(format!("safety: {} terminated with a live predecessor unfinished", NAMES[v]));
        }
    }
    for ev in events {
        if let EventBody::ActivityStateChanged { activity, from, to, .. } = &ev.body {
            if rank(*to) <= rank(*from) {
                return Err(format!("monotonicity: {activity} moved {from} -> {to}"));
            }
        }
    }
    let conditions: Vec<&EventBody> =
        events.iter().map(|e| &e.body).filter(|b| matches!(b, EventBody::ConditionEvaluated { .. })).collect();
    match step.action {
        Action::Terminate(v, _) if dag.xor.contains(&v) => {
            let [EventBody::ConditionEvaluated { chosen, .. }] = conditions.as_slice() else {
                return Err(format!("xor: {} resolved {} times", NAMES[v], conditions.len()));
            };
            if !dag.successors(v).iter().any(|&t| NAMES[t] == chosen) {
                return Err(format!("xor: {} chose non-successor {chosen}", NAMES[v]));
            }
        }
        _ if !conditions.is_empty() => return Err("xor: condition evaluated outside a split".into()),
        _ => {}
    }
    if !anticipation
        && step
            .after
            .state_vector()
            .iter()
            .any(|s| matches!(s, ActivityState::Anticipable | ActivityState::Anticipating))
    {
        return Err("reduction: anticipation state with anticipation off".into());
    }
    check_state(dag, step.after)
}

/// Activities that only unchosen branches lead to must be Cancelled.
pub fn check_state(dag: &Dag, inst: &ProcessInstance) -> Result<(), String> {
    let (states, chosen) = key_of(dag, inst);
    for &s in &dag.xor {
        if states[s] == ActivityState::Terminated && chosen[s].is_none() {
            return Err(format!("xor: {} terminated without a branch", NAMES[s]));
        }
    }
    let mut reached = vec![false; dag.n];
    for v in 0..dag.n {
        let preds = dag.predecessors(v);
        reached[v] = preds.is_empty()
            || preds.iter().any(|&p| reached[p] && !(dag.xor.contains(&p) && chosen[p].is_some_and(|c| c != v)));
    }
    for v in 0..dag.n {
        if !reached[v] && states[v] != ActivityState::Cancelled {
            return Err(format!("xor: {} is only reachable through unchosen branches but is {}", NAMES[v], states[v]));
        }
    }
    let done = states.iter().all(|s| s.is_final());
    if done != (inst.status() == wf_core::engine::InstanceStatus::Completed) {
        return Err("status disagrees with activity states".into());
    }
    Ok(())
}
