use serde::{Deserialize, Serialize};

use super::state::ActivityState;
use crate::model::ProcessDefinition;
use crate::router::Provenance;
use crate::Timestamp;

/// Why an activity changed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cause {
    Start,
    Terminate,
    Cancel,
    /// Re-derived from predecessor states and edge liveness.
    Derived,
    /// Anticipating -> Executing once every live predecessor terminated.
    Promoted,
}

/// One entry of an instance's append-only log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineEvent {
    pub seq: u64,
    pub instance: String,
    pub at: Timestamp,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventBody {
    DefinitionLoaded {
        definition: ProcessDefinition,
        anticipation: bool,
    },
    ActivityStateChanged {
        activity: String,
        from: ActivityState,
        to: ActivityState,
        cause: Cause,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        actor: Option<String>,
    },
    DataEmitted {
        producer: String,
        consumer: String,
        #[serde(default)]
        feedback: bool,
        format: String,
        packet_seq: u64,
        provenance: Provenance,
        #[serde(with = "base64_bytes")]
        message: Vec<u8>,
    },
    ConditionEvaluated {
        split: String,
        chosen: String,
        /// Index of the matching condition among the split's conditional
        /// branches; absent when the default branch was taken.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        condition: Option<usize>,
    },
    InstanceCompleted,
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::DefinitionLoaded { .. } => "DefinitionLoaded",
            EventBody::ActivityStateChanged { .. } => "ActivityStateChanged",
            EventBody::DataEmitted { .. } => "DataEmitted",
            EventBody::ConditionEvaluated { .. } => "ConditionEvaluated",
            EventBody::InstanceCompleted => "InstanceCompleted",
        }
    }
}

mod base64_bytes {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        STANDARD.decode(text).map_err(serde::de::Error::custom)
    }
}
