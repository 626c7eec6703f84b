use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::event::{EngineEvent, EventBody};
use super::state::{ActivityInstance, ActivityState, InstanceStatus};
use crate::error::{EngineError, ReplayError};
use crate::model::{validate_definition, ProcessDefinition, SplitKind, Topology};
use crate::router::{DataPacket, EdgeInput, EdgeKey, InputView, PacketSummary, Provenance, Router};
use crate::Timestamp;

/// Liveness of a control edge as seen by its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLiveness {
    Live,
    /// Source cancelled, or an XOR branch that was not chosen.
    Dead,
    /// Leaves an XOR split whose branch has not been chosen yet.
    Unresolved,
}

/// A running (or finished) execution of one process definition.
///
/// State only ever changes by applying [`EngineEvent`]s, whether they were
/// just produced by an action or read back from a log, so a replayed
/// instance is identical to the live one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessInstance {
    pub(crate) id: String,
    pub(crate) definition: Arc<ProcessDefinition>,
    pub(crate) topology: Arc<Topology>,
    pub(crate) activities: Vec<ActivityInstance>,
    /// Chosen control edge per XOR split, once evaluated.
    pub(crate) chosen: Vec<Option<usize>>,
    pub(crate) anticipation_enabled: bool,
    pub(crate) seq: u64,
    pub(crate) last_at: Timestamp,
    pub(crate) status: InstanceStatus,
    pub(crate) router: Router,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Worklist {
    pub executing: Vec<String>,
    pub anticipating: Vec<String>,
    pub ready: Vec<String>,
    pub anticipable: Vec<String>,
}

impl Worklist {
    pub fn is_empty(&self) -> bool {
        self.executing.is_empty()
            && self.anticipating.is_empty()
            && self.ready.is_empty()
            && self.anticipable.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub id: String,
    pub definition: String,
    pub version: u64,
    pub status: InstanceStatus,
    pub seq: u64,
    pub anticipation: bool,
    /// Activities that ever entered Anticipating.
    pub anticipated: usize,
    pub activities: Vec<ActivityInstance>,
}

impl ProcessInstance {
    pub(crate) fn blank(definition: Arc<ProcessDefinition>, id: &str, anticipation_enabled: bool) -> Self {
        let topology = Arc::new(Topology::new(&definition));
        ProcessInstance {
            id: id.to_owned(),
            activities: definition.activities.iter().map(|a| ActivityInstance::new(&a.name)).collect(),
            chosen: vec![None; definition.activities.len()],
            definition,
            topology,
            anticipation_enabled,
            seq: 0,
            last_at: 0,
            status: InstanceStatus::Running,
            router: Router::default(),
        }
    }

    /// Rebuilds an instance from its complete event log.
    pub fn replay<'a, I>(events: I) -> Result<ProcessInstance, ReplayError>
    where
        I: IntoIterator<Item = &'a EngineEvent>,
    {
        let mut events = events.into_iter();
        let first = events.next().ok_or(ReplayError::MissingDefinition)?;
        let EventBody::DefinitionLoaded { definition, anticipation } = &first.body else {
            return Err(ReplayError::MissingDefinition);
        };
        let report = validate_definition(definition);
        if !report.is_empty() {
            return Err(ReplayError::InvalidDefinition(report));
        }
        let mut inst = ProcessInstance::blank(Arc::new(definition.clone()), &first.instance, *anticipation);
        inst.apply(first)?;
        for ev in events {
            inst.apply(ev)?;
        }
        Ok(inst)
    }

    /// Applies one logged event. This is the only state mutation path.
    pub fn apply(&mut self, ev: &EngineEvent) -> Result<(), ReplayError> {
        if ev.seq != self.seq + 1 {
            return Err(ReplayError::SeqGap { expected: self.seq + 1, found: ev.seq });
        }
        if ev.instance != self.id {
            return Err(ReplayError::WrongInstance { expected: self.id.clone(), found: ev.instance.clone() });
        }
        let bad = |reason: String| ReplayError::Inapplicable { seq: ev.seq, reason };

        match &ev.body {
            EventBody::DefinitionLoaded { definition, anticipation } => {
                if self.seq != 0 || *definition != *self.definition || *anticipation != self.anticipation_enabled {
                    return Err(bad("DefinitionLoaded must open the log of this instance".into()));
                }
            }
            EventBody::ActivityStateChanged { activity, from, to, .. } => {
                let i = self.index(activity).ok_or_else(|| bad(format!("unknown activity `{activity}`")))?;
                let rec = &mut self.activities[i];
                if rec.state != *from {
                    return Err(bad(format!("`{activity}` is {}, event says {from}", rec.state)));
                }
                let anticipatory = matches!(to, ActivityState::Anticipable | ActivityState::Anticipating);
                if !from.can_become(*to) || (anticipatory && !self.anticipation_enabled) {
                    return Err(bad(format!("`{activity}` cannot move {from} -> {to}")));
                }
                rec.state = *to;
                if *to == ActivityState::Anticipating {
                    rec.anticipated = true;
                }
                if from.is_unstarted() && to.is_active() {
                    rec.started_at = Some(ev.at);
                }
                if *to == ActivityState::Terminated {
                    rec.terminated_at = Some(ev.at);
                }
            }
            EventBody::DataEmitted { producer, consumer, feedback, format, packet_seq, provenance, message } => {
                let edge = self
                    .definition
                    .data_edge(producer, consumer, *feedback)
                    .ok_or_else(|| bad(format!("no data edge {producer} -> {consumer}")))?;
                if edge.format != *format {
                    return Err(bad(format!("edge carries `{}`, event says `{format}`", edge.format)));
                }
                let key = EdgeKey { producer: producer.clone(), consumer: consumer.clone(), feedback: *feedback };
                let packet = DataPacket {
                    packet_seq: *packet_seq,
                    provenance: *provenance,
                    message: Arc::from(message.as_slice()),
                    emitted_at: ev.at,
                };
                self.router.store(key, packet).map_err(bad)?;
            }
            EventBody::ConditionEvaluated { split, chosen, .. } => {
                let s = self.index(split).ok_or_else(|| bad(format!("unknown activity `{split}`")))?;
                if self.definition.activities[s].split_kind != SplitKind::Xor || self.chosen[s].is_some() {
                    return Err(bad(format!("`{split}` is not an unresolved XOR split")));
                }
                let e = self.topology.outgoing[s]
                    .iter()
                    .copied()
                    .find(|&e| self.definition.control_edges[e].target == *chosen)
                    .ok_or_else(|| bad(format!("`{split}` has no branch to `{chosen}`")))?;
                self.chosen[s] = Some(e);
            }
            EventBody::InstanceCompleted => {
                if self.status == InstanceStatus::Completed || !self.all_final() {
                    return Err(bad("instance is not complete".into()));
                }
                self.status = InstanceStatus::Completed;
            }
        }
        self.seq = ev.seq;
        self.last_at = self.last_at.max(ev.at);
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn definition(&self) -> &ProcessDefinition {
        &self.definition
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn status(&self) -> InstanceStatus {
        self.status
    }

    pub fn anticipation_enabled(&self) -> bool {
        self.anticipation_enabled
    }

    pub fn router(&self) -> &Router {
        &self.router
    }

    pub fn activity(&self, name: &str) -> Option<&ActivityInstance> {
        self.index(name).map(|i| &self.activities[i])
    }

    /// Activities in declaration order.
    pub fn activities(&self) -> &[ActivityInstance] {
        &self.activities
    }

    pub fn state_of(&self, name: &str) -> Option<ActivityState> {
        self.activity(name).map(|a| a.state)
    }

    /// States in declaration order.
    pub fn state_vector(&self) -> Vec<ActivityState> {
        self.activities.iter().map(|a| a.state).collect()
    }

    /// Target of the branch an XOR split took, once evaluated.
    pub fn chosen_branch(&self, split: &str) -> Option<&str> {
        let e = self.chosen[self.index(split)?]?;
        Some(&self.definition.control_edges[e].target)
    }

    pub(crate) fn index(&self, name: &str) -> Option<usize> {
        self.topology.index_of(name)
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize, EngineError> {
        self.index(name).ok_or_else(|| EngineError::UnknownActivity(name.to_owned()))
    }

    pub(crate) fn all_final(&self) -> bool {
        self.activities.iter().all(|a| a.state.is_final())
    }

    pub fn edge_liveness(&self, edge: usize) -> EdgeLiveness {
        let (source, _) = self.topology.ends[edge].expect("validated edges have both ends");
        if self.activities[source].state == ActivityState::Cancelled {
            return EdgeLiveness::Dead;
        }
        if self.definition.activities[source].split_kind == SplitKind::Xor {
            return match self.chosen[source] {
                None => EdgeLiveness::Unresolved,
                Some(c) if c == edge => EdgeLiveness::Live,
                Some(_) => EdgeLiveness::Dead,
            };
        }
        EdgeLiveness::Live
    }

    /// The state the rules table assigns to `activity` right now.
    pub fn derive_state(&self, activity: &str) -> Result<ActivityState, EngineError> {
        Ok(self.derive_index(self.require(activity)?))
    }

    pub(crate) fn derive_index(&self, i: usize) -> ActivityState {
        use ActivityState::*;

        let current = self.activities[i].state;
        if !current.is_unstarted() {
            return current;
        }
        let incoming = &self.topology.incoming[i];
        let mut dead = 0;
        let mut live_sources = Vec::with_capacity(incoming.len());
        for &e in incoming {
            match self.edge_liveness(e) {
                EdgeLiveness::Dead => dead += 1,
                EdgeLiveness::Unresolved => return Initial,
                EdgeLiveness::Live => {
                    let (s, _) = self.topology.ends[e].expect("validated edges have both ends");
                    live_sources.push(self.activities[s].state);
                }
            }
        }
        if !incoming.is_empty() && dead == incoming.len() {
            return Cancelled;
        }
        if live_sources.iter().all(|&s| s == Terminated) {
            return Ready;
        }
        if self.anticipation_enabled && live_sources.iter().all(|s| matches!(s, Anticipating | Executing | Terminated))
        {
            return Anticipable;
        }
        Initial
    }

    /// An Anticipating activity may be promoted once every live
    /// predecessor has terminated.
    pub(crate) fn promotable(&self, i: usize) -> bool {
        self.activities[i].state == ActivityState::Anticipating
            && self.topology.incoming[i].iter().all(|&e| match self.edge_liveness(e) {
                EdgeLiveness::Dead => true,
                EdgeLiveness::Unresolved => false,
                EdgeLiveness::Live => {
                    let (s, _) = self.topology.ends[e].expect("validated edges have both ends");
                    self.activities[s].state == ActivityState::Terminated
                }
            })
    }

    /// Partition of the non-final, started-or-startable activities. With an
    /// actor, only activities assigned to that actor or to nobody are listed.
    pub fn worklist(&self, actor: Option<&str>) -> Worklist {
        let mut list = Worklist::default();
        for &i in &self.topology.order {
            let def = &self.definition.activities[i];
            if let (Some(actor), Some(assignee)) = (actor, def.assignee.as_deref()) {
                if actor != assignee {
                    continue;
                }
            }
            let bucket = match self.activities[i].state {
                ActivityState::Executing => &mut list.executing,
                ActivityState::Anticipating => &mut list.anticipating,
                ActivityState::Ready => &mut list.ready,
                ActivityState::Anticipable => &mut list.anticipable,
                _ => continue,
            };
            bucket.push(def.name.clone());
        }
        list
    }

    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            id: self.id.clone(),
            definition: self.definition.name.clone(),
            version: self.definition.version,
            status: self.status,
            seq: self.seq,
            anticipation: self.anticipation_enabled,
            anticipated: self.activities.iter().filter(|a| a.anticipated).count(),
            activities: self.activities.clone(),
        }
    }

    /// Current inputs of `consumer`, decoded against each edge's declared format.
    pub fn fetch_inputs(&self, consumer: &str) -> Result<InputView, EngineError> {
        self.require(consumer)?;
        let mut inputs = Vec::new();
        for edge in self.definition.data_edges.iter().filter(|e| e.consumer == consumer) {
            let key =
                EdgeKey { producer: edge.producer.clone(), consumer: edge.consumer.clone(), feedback: edge.feedback };
            let Some(packet) = self.router.live_packet(&key) else { continue };
            let desc = self.definition.format(&edge.format).expect("validated edges name declared formats");
            let (record, report) =
                pbio::decode_as(&packet.message, desc).map_err(|e| EngineError::UndecodablePacket(e.to_string()))?;
            inputs.push(EdgeInput {
                from: edge.producer.clone(),
                feedback: edge.feedback,
                format: edge.format.clone(),
                packet_seq: packet.packet_seq,
                provenance: packet.provenance,
                stale: packet.provenance == Provenance::Provisional,
                emitted_at: packet.emitted_at,
                record,
                report,
                history: self
                    .router
                    .packets(&key)
                    .iter()
                    .map(|p| PacketSummary {
                        packet_seq: p.packet_seq,
                        provenance: p.provenance,
                        emitted_at: p.emitted_at,
                    })
                    .collect(),
            });
        }
        Ok(InputView { activity: consumer.to_owned(), inputs })
    }
}
