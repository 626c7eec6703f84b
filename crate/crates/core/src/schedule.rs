//! Discrete-event simulation of a process run by eager participants.
//!
//! Every activity starts the moment the engine allows it. Work done while
//! anticipating counts in full, so an anticipated activity whose work is
//! already finished terminates as soon as it is promoted.

use std::collections::BTreeMap;

use pbio::json::JsonRecord;
use serde::Serialize;

use crate::engine::{ActivityState, InstanceStatus, ProcessInstance};
use crate::error::EngineError;
use crate::model::ProcessDefinition;
use crate::Timestamp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    /// Activities that ran, keyed by name. Cancelled ones are absent.
    pub spans: BTreeMap<String, Span>,
    pub makespan: Timestamp,
}

/// Inputs to [`simulate`]. Missing durations count as zero and missing
/// outputs as an empty record.
#[derive(Debug, Clone, Default)]
pub struct Workload {
    pub durations: BTreeMap<String, Timestamp>,
    pub outputs: BTreeMap<String, JsonRecord>,
}

impl Workload {
    pub fn with_duration(mut self, activity: &str, d: Timestamp) -> Self {
        self.durations.insert(activity.to_owned(), d);
        self
    }

    pub fn with_output(mut self, activity: &str, output: JsonRecord) -> Self {
        self.outputs.insert(activity.to_owned(), output);
        self
    }
}

pub fn simulate(def: &ProcessDefinition, load: &Workload, anticipation: bool) -> Result<Schedule, EngineError> {
    let (mut inst, _) = ProcessInstance::create(def.clone(), "sim", anticipation, 0)?;
    let order = inst.topology().order.clone();
    let names: Vec<String> = def.activities.iter().map(|a| a.name.clone()).collect();
    let mut started: Vec<Option<Timestamp>> = vec![None; names.len()];
    let mut ended: Vec<Option<Timestamp>> = vec![None; names.len()];
    let empty = JsonRecord::new();
    let mut now = 0;

    while inst.status() == InstanceStatus::Running {
        let mut progress = true;
        while progress {
            progress = false;
            for &i in &order {
                let state = inst.activities()[i].state;
                if state == ActivityState::Ready || state == ActivityState::Anticipable {
                    inst.start_activity(&names[i], None, now)?;
                    started[i] = Some(now);
                    progress = true;
                }
            }
        }

        let due = |i: usize| started[i].unwrap_or(0) + load.durations.get(&names[i]).copied().unwrap_or(0);
        let executing: Vec<usize> =
            order.iter().copied().filter(|&i| inst.activities()[i].state == ActivityState::Executing).collect();
        let Some(next) = executing.iter().map(|&i| due(i).max(now)).min() else {
            return Err(EngineError::Inconsistent(crate::ReplayError::Inapplicable {
                seq: inst.seq(),
                reason: "simulation stalled with nothing executing".into(),
            }));
        };
        for i in executing {
            if due(i) <= next {
                let output = load.outputs.get(&names[i]).unwrap_or(&empty);
                inst.terminate_activity(&names[i], output, next)?;
                ended[i] = Some(next);
            }
        }
        now = next;
    }

    let spans: BTreeMap<String, Span> = (0..names.len())
        .filter_map(|i| Some((names[i].clone(), Span { start: started[i]?, end: ended[i]? })))
        .collect();
    let makespan = spans.values().map(|s| s.end).max().unwrap_or(0);
    Ok(Schedule { spans, makespan })
}
