//! The engine behind the HTTP API.
//!
//! Every instance has a single writer. An action runs on a copy of the
//! instance, its events are appended to the log and synced, and only then is
//! the new state swapped in and announced to subscribers. A crash at any
//! point therefore loses at most an action nobody was told about.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use pbio::json::JsonRecord;
use tokio::sync::watch;
use wf_core::engine::{EngineEvent, InstanceSummary, ProcessInstance, Worklist};
use wf_core::model::{validate_definition, ProcessDefinition};
use wf_core::router::InputView;
use wf_core::{EngineError, Timestamp};

use crate::error::ApiError;
use crate::store::{Store, StoreError};

pub type Clock = Box<dyn Fn() -> Timestamp + Send + Sync>;

pub fn wall_clock() -> Timestamp {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as Timestamp)
}

struct Slot {
    writer: Mutex<()>,
    state: RwLock<Snapshot>,
    seq: watch::Sender<u64>,
}

struct Snapshot {
    instance: ProcessInstance,
    log: Vec<EngineEvent>,
}

pub struct Service {
    store: Option<Store>,
    clock: Clock,
    definitions: RwLock<HashMap<String, Arc<ProcessDefinition>>>,
    instances: RwLock<HashMap<String, Arc<Slot>>>,
    closing: watch::Sender<bool>,
}

/// One action on an existing instance.
#[derive(Debug, Clone)]
pub enum Action {
    Start { activity: String, actor: Option<String> },
    Terminate { activity: String, output: JsonRecord },
    Cancel { activity: String },
    Emit { activity: String, to: String, feedback: bool, record: JsonRecord },
}

impl Service {
    /// Opens a data directory, replaying every stored instance.
    pub fn open(store: Store) -> Result<Service, StoreError> {
        let svc = Service::build(Some(store.clone()), Box::new(wall_clock));
        for def in store.load_definitions()? {
            svc.definitions.write().unwrap().insert(def.name.clone(), Arc::new(def));
        }
        for id in store.instance_ids()? {
            let (instance, log) = store.recover(&id)?;
            svc.instances.write().unwrap().insert(id, Slot::new(instance, log));
        }
        Ok(svc)
    }

    /// Nothing is persisted.
    pub fn in_memory(clock: Clock) -> Service {
        Service::build(None, clock)
    }

    fn build(store: Option<Store>, clock: Clock) -> Service {
        let (closing, _) = watch::channel(false);
        Service { store, clock, definitions: RwLock::default(), instances: RwLock::default(), closing }
    }

    pub fn store(&self) -> Option<&Store> {
        self.store.as_ref()
    }

    pub fn load_definition(&self, document: &str) -> Result<Arc<ProcessDefinition>, ApiError> {
        let def = ProcessDefinition::parse(document)?;
        let report = validate_definition(&def);
        if !report.is_empty() {
            return Err(EngineError::InvalidDefinition(report).into());
        }
        let mut defs = self.definitions.write().unwrap();
        if let Some(store) = &self.store {
            store.save_definition(&def)?;
        }
        let def = Arc::new(def);
        defs.insert(def.name.clone(), Arc::clone(&def));
        Ok(def)
    }

    pub fn definition(&self, name: &str) -> Result<Arc<ProcessDefinition>, ApiError> {
        self.definitions.read().unwrap().get(name).cloned().ok_or_else(|| ApiError::unknown_definition(name))
    }

    pub fn create_instance(
        &self,
        definition: &str,
        id: Option<&str>,
        anticipation: bool,
    ) -> Result<(String, Vec<EngineEvent>), ApiError> {
        let def = self.definition(definition)?;
        let id = match id {
            Some(id) if !wf_core::model::is_identifier(id) => {
                return Err(ApiError::bad_request(format!("invalid id `{id}`")))
            }
            Some(id) => id.to_owned(),
            None => uuid::Uuid::new_v4().to_string(),
        };
        let mut instances = self.instances.write().unwrap();
        if instances.contains_key(&id) {
            return Err(EngineError::DuplicateInstanceId(id).into());
        }
        let (instance, events) = ProcessInstance::create(def, &id, anticipation, (self.clock)())?;
        if let Some(store) = &self.store {
            store.create_log(&id, &events).map_err(|e| match e {
                StoreError::Io { ref source, .. } if source.kind() == std::io::ErrorKind::AlreadyExists => {
                    EngineError::DuplicateInstanceId(id.clone()).into()
                }
                e => ApiError::from(e),
            })?;
        }
        instances.insert(id.clone(), Slot::new(instance, events.clone()));
        Ok((id, events))
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.instances
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::UnknownInstance(id.to_owned()).into())
    }

    pub fn instance_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.instances.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Serialized per instance; the log append happens before publication.
    pub fn act(&self, id: &str, action: &Action) -> Result<Vec<EngineEvent>, ApiError> {
        let slot = self.slot(id)?;
        let _writer = slot.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = slot.state.read().unwrap().instance.clone();
        let at = (self.clock)();
        let events = match action {
            Action::Start { activity, actor } => next.start_activity(activity, actor.as_deref(), at),
            Action::Terminate { activity, output } => next.terminate_activity(activity, output, at),
            Action::Cancel { activity } => next.cancel_activity(activity, at),
            Action::Emit { activity, to, feedback, record } => next.emit(activity, to, *feedback, record, at),
        }?;
        if let Some(store) = &self.store {
            store.append(id, &events)?;
        }
        let seq = next.seq();
        {
            let mut snap = slot.state.write().unwrap();
            snap.instance = next;
            snap.log.extend(events.iter().cloned());
        }
        slot.seq.send_replace(seq);
        Ok(events)
    }

    fn read<T>(&self, id: &str, f: impl FnOnce(&Snapshot) -> T) -> Result<T, ApiError> {
        let slot = self.slot(id)?;
        let snap = slot.state.read().unwrap();
        Ok(f(&snap))
    }

    pub fn summary(&self, id: &str) -> Result<InstanceSummary, ApiError> {
        self.read(id, |s| s.instance.summary())
    }

    pub fn worklist(&self, id: &str, actor: Option<&str>) -> Result<Worklist, ApiError> {
        self.read(id, |s| s.instance.worklist(actor))
    }

    pub fn inputs(&self, id: &str, activity: &str) -> Result<InputView, ApiError> {
        self.read(id, |s| s.instance.fetch_inputs(activity))?.map_err(ApiError::from)
    }

    pub fn instance(&self, id: &str) -> Result<ProcessInstance, ApiError> {
        self.read(id, |s| s.instance.clone())
    }

    /// Logged events with `seq > after`.
    pub fn events_after(&self, id: &str, after: u64) -> Result<Vec<EngineEvent>, ApiError> {
        self.read(id, |s| s.log.iter().skip(after as usize).cloned().collect())
    }

    /// Ends every following event stream.
    pub fn close(&self) {
        self.closing.send_replace(true);
    }

    pub fn closing(&self) -> watch::Receiver<bool> {
        self.closing.subscribe()
    }

    /// Changes whenever new events are published.
    pub fn subscribe(&self, id: &str) -> Result<watch::Receiver<u64>, ApiError> {
        Ok(self.slot(id)?.seq.subscribe())
    }
}

impl Slot {
    fn new(instance: ProcessInstance, log: Vec<EngineEvent>) -> Arc<Slot> {
        let (seq, _) = watch::channel(instance.seq());
        Arc::new(Slot { writer: Mutex::new(()), state: RwLock::new(Snapshot { instance, log }), seq })
    }
}
