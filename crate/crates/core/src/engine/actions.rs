use std::sync::Arc;

use pbio::json::{project_json, record_from_json, JsonRecord};
use pbio::ByteOrder;

use super::condition::evaluate_conditions;
use super::event::{Cause, EngineEvent, EventBody};
use super::instance::ProcessInstance;
use super::state::{ActivityState, InstanceStatus};
use crate::error::EngineError;
use crate::model::{validate_definition, DataEdge, ProcessDefinition, SplitKind};
use crate::router::{validate_feedback_target, EdgeKey, Provenance};
use crate::Timestamp;

/// Works on a draft copy; the instance is only replaced when every step
/// succeeded, so a failed action leaves no trace.
struct Txn {
    draft: ProcessInstance,
    events: Vec<EngineEvent>,
    at: Timestamp,
}

impl Txn {
    fn begin(inst: &ProcessInstance, at: Timestamp) -> Txn {
        Txn { at: at.max(inst.last_at), draft: inst.clone(), events: Vec::new() }
    }

    fn push(&mut self, body: EventBody) -> Result<(), EngineError> {
        let ev = EngineEvent { seq: self.draft.seq + 1, instance: self.draft.id.clone(), at: self.at, body };
        self.draft.apply(&ev)?;
        self.events.push(ev);
        Ok(())
    }

    fn change(&mut self, i: usize, to: ActivityState, cause: Cause, actor: Option<&str>) -> Result<(), EngineError> {
        let from = self.draft.activities[i].state;
        self.push(EventBody::ActivityStateChanged {
            activity: self.draft.definition.activities[i].name.clone(),
            from,
            to,
            cause,
            actor: actor.map(str::to_owned),
        })
    }

    /// Re-derives every unstarted activity and promotes anticipating ones,
    /// in canonical order, until nothing changes.
    fn settle(&mut self) -> Result<(), EngineError> {
        let topo = Arc::clone(&self.draft.topology);
        loop {
            let mut changed = false;
            for &i in &topo.order {
                let current = self.draft.activities[i].state;
                if current.is_unstarted() {
                    let derived = self.draft.derive_index(i);
                    if derived != current {
                        self.change(i, derived, Cause::Derived, None)?;
                        changed = true;
                    }
                }
            }
            for &i in &topo.order {
                if self.draft.promotable(i) {
                    self.change(i, ActivityState::Executing, Cause::Promoted, None)?;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if self.draft.status == InstanceStatus::Running && self.draft.all_final() {
            self.push(EventBody::InstanceCompleted)?;
        }
        Ok(())
    }

    fn commit(self, target: &mut ProcessInstance) -> Vec<EngineEvent> {
        *target = self.draft;
        self.events
    }
}

fn illegal(inst: &ProcessInstance, i: usize) -> EngineError {
    EngineError::IllegalTransition {
        activity: inst.definition.activities[i].name.clone(),
        state: inst.activities[i].state,
    }
}

impl ProcessInstance {
    /// Creates an instance: every activity starts Initial, then one
    /// derivation pass makes the source activities Ready.
    pub fn create(
        definition: impl Into<Arc<ProcessDefinition>>,
        id: &str,
        anticipation_enabled: bool,
        at: Timestamp,
    ) -> Result<(ProcessInstance, Vec<EngineEvent>), EngineError> {
        let definition = definition.into();
        let report = validate_definition(&definition);
        if !report.is_empty() {
            return Err(EngineError::InvalidDefinition(report));
        }
        let mut inst = ProcessInstance::blank(Arc::clone(&definition), id, anticipation_enabled);
        let mut tx = Txn::begin(&inst, at);
        tx.push(EventBody::DefinitionLoaded { definition: (*definition).clone(), anticipation: anticipation_enabled })?;
        tx.settle()?;
        let events = tx.commit(&mut inst);
        Ok((inst, events))
    }

    /// Ready -> Executing, or Anticipable -> Anticipating.
    pub fn start_activity(
        &mut self,
        activity: &str,
        actor: Option<&str>,
        at: Timestamp,
    ) -> Result<Vec<EngineEvent>, EngineError> {
        let i = self.require(activity)?;
        let to = match self.activities[i].state {
            ActivityState::Ready => ActivityState::Executing,
            ActivityState::Anticipable => ActivityState::Anticipating,
            _ => return Err(illegal(self, i)),
        };
        let mut tx = Txn::begin(self, at);
        tx.change(i, to, Cause::Start, actor)?;
        tx.settle()?;
        Ok(tx.commit(self))
    }

    /// Executing -> Terminated. Stores the final output on every forward
    /// data edge, resolves an XOR split, and cascades derivation and
    /// promotion. Atomic: any error leaves the instance untouched.
    pub fn terminate_activity(
        &mut self,
        activity: &str,
        output: &JsonRecord,
        at: Timestamp,
    ) -> Result<Vec<EngineEvent>, EngineError> {
        let i = self.require(activity)?;
        if self.activities[i].state != ActivityState::Executing {
            return Err(illegal(self, i));
        }
        let finals = self.encode_final_outputs(activity, output)?;
        let branch = match self.definition.activities[i].split_kind {
            SplitKind::Xor => Some(evaluate_conditions(&self.definition, &self.topology, i, output)?),
            SplitKind::And => None,
        };

        let mut tx = Txn::begin(self, at);
        tx.change(i, ActivityState::Terminated, Cause::Terminate, None)?;
        for (edge, message) in finals {
            let key = EdgeKey { producer: edge.producer.clone(), consumer: edge.consumer.clone(), feedback: false };
            tx.push(EventBody::DataEmitted {
                packet_seq: tx.draft.router.next_seq(&key),
                producer: edge.producer,
                consumer: edge.consumer,
                feedback: false,
                format: edge.format,
                provenance: Provenance::Final,
                message,
            })?;
        }
        if let Some(branch) = branch {
            tx.push(EventBody::ConditionEvaluated {
                split: activity.to_owned(),
                chosen: self.definition.control_edges[branch.edge].target.clone(),
                condition: branch.condition,
            })?;
        }
        tx.settle()?;
        Ok(tx.commit(self))
    }

    /// Encodes `output` for each forward data edge leaving `producer`.
    fn encode_final_outputs(
        &self,
        producer: &str,
        output: &JsonRecord,
    ) -> Result<Vec<(DataEdge, Vec<u8>)>, EngineError> {
        let edges: Vec<&DataEdge> =
            self.definition.data_edges.iter().filter(|e| e.producer == producer && !e.feedback).collect();
        if edges.is_empty() {
            return Ok(Vec::new());
        }
        let mismatch = |format: &str, reason: String| EngineError::FormatMismatch {
            activity: producer.to_owned(),
            format: format.to_owned(),
            reason,
        };
        let formats: Vec<_> = edges
            .iter()
            .map(|e| self.definition.format(&e.format).expect("validated edges name declared formats"))
            .collect();
        if let Some(extra) = output.keys().find(|k| formats.iter().all(|f| f.field(k).is_none())) {
            let names: Vec<&str> = formats.iter().map(|f| f.name.as_str()).collect();
            return Err(mismatch(&names.join("|"), format!("field `{extra}` is not declared by any outgoing format")));
        }
        edges
            .into_iter()
            .zip(formats)
            .map(|(edge, desc)| {
                let rec = project_json(desc, output).map_err(|e| mismatch(&desc.name, e.to_string()))?;
                let bytes =
                    pbio::encode(desc, &rec, ByteOrder::Little).map_err(|e| mismatch(&desc.name, e.to_string()))?;
                Ok((edge.clone(), bytes))
            })
            .collect()
    }

    /// Operator abort of an activity that has not started.
    pub fn cancel_activity(&mut self, activity: &str, at: Timestamp) -> Result<Vec<EngineEvent>, EngineError> {
        let i = self.require(activity)?;
        if !self.activities[i].state.is_unstarted() {
            return Err(illegal(self, i));
        }
        let mut tx = Txn::begin(self, at);
        tx.change(i, ActivityState::Cancelled, Cause::Cancel, None)?;
        tx.settle()?;
        Ok(tx.commit(self))
    }

    /// Provisional output from a running producer along one data edge.
    pub fn emit(
        &mut self,
        producer: &str,
        consumer: &str,
        feedback: bool,
        record: &JsonRecord,
        at: Timestamp,
    ) -> Result<Vec<EngineEvent>, EngineError> {
        let p = self.require(producer)?;
        let state = self.activities[p].state;
        if !state.is_active() {
            return Err(EngineError::IllegalProducerState { activity: producer.to_owned(), state });
        }
        let edge =
            self.definition.data_edge(producer, consumer, feedback).cloned().ok_or_else(|| {
                EngineError::UnknownEdge { from: producer.to_owned(), to: consumer.to_owned(), feedback }
            })?;
        let desc = self.definition.format(&edge.format).expect("validated edges name declared formats");
        let mismatch = |reason: String| EngineError::FormatMismatch {
            activity: producer.to_owned(),
            format: desc.name.clone(),
            reason,
        };
        let rec = record_from_json(desc, record).map_err(|e| mismatch(e.to_string()))?;
        let message = pbio::encode(desc, &rec, ByteOrder::Little).map_err(|e| mismatch(e.to_string()))?;
        if feedback {
            let target = self.activities[self.require(consumer)?].state;
            validate_feedback_target(target)
                .map_err(|state| EngineError::FeedbackTargetInactive { target: consumer.to_owned(), state })?;
        }

        let key = EdgeKey { producer: edge.producer.clone(), consumer: edge.consumer.clone(), feedback };
        let mut tx = Txn::begin(self, at);
        tx.push(EventBody::DataEmitted {
            packet_seq: self.router.next_seq(&key),
            producer: edge.producer,
            consumer: edge.consumer,
            feedback,
            format: edge.format,
            provenance: Provenance::Provisional,
            message,
        })?;
        Ok(tx.commit(self))
    }
}
