//! Per-instance dataflow: packets travelling along data edges.
//!
//! While a producer is still running it may emit provisional packets; its
//! termination stores one final packet per forward edge and supersedes every
//! provisional one on that edge. Consumers always read the final packet when
//! there is one, otherwise the newest provisional packet.

use std::collections::BTreeMap;
use std::sync::Arc;

use pbio::{DecodeReport, Record};
use serde::{Deserialize, Serialize, Serializer};

use crate::engine::ActivityState;
use crate::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Provisional,
    Final,
    Superseded,
}

/// Identifies a data edge by its endpoints and direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub producer: String,
    pub consumer: String,
    pub feedback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPacket {
    pub packet_seq: u64,
    pub provenance: Provenance,
    /// Encoded self-describing message.
    pub message: Arc<[u8]>,
    pub emitted_at: Timestamp,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Router {
    channels: BTreeMap<EdgeKey, Vec<DataPacket>>,
}

impl Router {
    pub fn packets(&self, key: &EdgeKey) -> &[DataPacket] {
        self.channels.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn channels(&self) -> impl Iterator<Item = (&EdgeKey, &[DataPacket])> {
        self.channels.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn next_seq(&self, key: &EdgeKey) -> u64 {
        self.packets(key).last().map_or(1, |p| p.packet_seq + 1)
    }

    /// Stores a packet. Returns a reason when the packet would break the
    /// per-edge invariants.
    pub(crate) fn store(&mut self, key: EdgeKey, packet: DataPacket) -> Result<(), String> {
        let expected = self.next_seq(&key);
        if packet.packet_seq != expected {
            return Err(format!("packet_seq {} on {key:?}, expected {expected}", packet.packet_seq));
        }
        let list = self.channels.entry(key).or_default();
        match packet.provenance {
            Provenance::Superseded => return Err("packets are never emitted as Superseded".into()),
            Provenance::Final => {
                if list.iter().any(|p| p.provenance == Provenance::Final) {
                    return Err("edge already has a final packet".into());
                }
                for p in list.iter_mut() {
                    p.provenance = Provenance::Superseded;
                }
            }
            Provenance::Provisional => {
                if list.iter().any(|p| p.provenance == Provenance::Final) {
                    return Err("provisional packet after the final one".into());
                }
            }
        }
        list.push(packet);
        Ok(())
    }

    /// The packet a consumer reads: Final if present, else the newest Provisional.
    pub fn live_packet(&self, key: &EdgeKey) -> Option<&DataPacket> {
        let list = self.packets(key);
        list.iter()
            .find(|p| p.provenance == Provenance::Final)
            .or_else(|| list.iter().rev().find(|p| p.provenance == Provenance::Provisional))
    }
}

/// Feedback may only reach an upstream activity that is still running.
pub fn validate_feedback_target(target_state: ActivityState) -> Result<(), ActivityState> {
    if target_state.is_active() {
        Ok(())
    } else {
        Err(target_state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PacketSummary {
    pub packet_seq: u64,
    pub provenance: Provenance,
    pub emitted_at: Timestamp,
}

/// What one incoming data edge currently delivers to its consumer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeInput {
    pub from: String,
    pub feedback: bool,
    pub format: String,
    pub packet_seq: u64,
    pub provenance: Provenance,
    /// True while only provisional data is available.
    pub stale: bool,
    pub emitted_at: Timestamp,
    #[serde(serialize_with = "record_as_json")]
    pub record: Record,
    pub report: DecodeReport,
    pub history: Vec<PacketSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputView {
    pub activity: String,
    /// One entry per incoming data edge that has carried at least one packet.
    pub inputs: Vec<EdgeInput>,
}

impl InputView {
    pub fn input_from(&self, producer: &str, feedback: bool) -> Option<&EdgeInput> {
        self.inputs.iter().find(|i| i.from == producer && i.feedback == feedback)
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

fn record_as_json<S: Serializer>(rec: &Record, s: S) -> Result<S::Ok, S::Error> {
    pbio::json::record_to_json(rec).serialize(s)
}
