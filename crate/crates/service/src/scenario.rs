//! Scripted runs against a fresh in-memory engine.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "name": "demo",
//!   "steps": [
//!     { "do": "load", "file": "chain.wf.json" },
//!     { "do": "create", "definition": "chain", "id": "c1" },
//!     { "do": "start", "activity": "A" },
//!     { "do": "terminate", "activity": "B", "expect": { "error": "IllegalTransition" } },
//!     { "do": "expect_states", "states": { "A": "Executing" } }
//!   ],
//!   "transcript": "demo.transcript.jsonl"
//! }
//! ```
//!
//! Actions apply to the most recently created instance and expect success
//! unless `expect` names an error code. The optional transcript lists the
//! expected event log, one event per line, without `at` timestamps.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use pbio::json::JsonRecord;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use wf_core::engine::{ActivityState, EngineEvent, InstanceStatus, Worklist};
use wf_core::router::Provenance;

use crate::error::ApiError;
use crate::service::{Action, Service};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub steps: Vec<Step>,
    /// Expected event log, relative to the scenario file.
    #[serde(default)]
    pub transcript: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "Value")]
pub struct Step {
    pub op: Op,
    pub expect: Expect,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expect {
    Ok,
    Error(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "do", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    Load {
        file: String,
    },
    Create {
        definition: String,
        id: String,
        #[serde(default = "yes")]
        anticipation: bool,
    },
    Start {
        activity: String,
        #[serde(default)]
        actor: Option<String>,
    },
    Terminate {
        activity: String,
        #[serde(default)]
        output: JsonRecord,
    },
    Emit {
        activity: String,
        to: String,
        #[serde(default)]
        feedback: bool,
        record: JsonRecord,
    },
    Cancel {
        activity: String,
    },
    ExpectStates {
        states: BTreeMap<String, ActivityState>,
    },
    ExpectWorklist {
        #[serde(default)]
        actor: Option<String>,
        worklist: Worklist,
    },
    ExpectInputs {
        activity: String,
        inputs: Vec<InputExpectation>,
    },
    ExpectStatus {
        status: InstanceStatus,
        #[serde(default)]
        anticipated: Option<usize>,
    },
}

fn yes() -> bool {
    true
}

/// Fields left out are not checked.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputExpectation {
    pub from: String,
    #[serde(default)]
    pub feedback: bool,
    #[serde(default)]
    pub provenance: Option<Provenance>,
    #[serde(default)]
    pub stale: Option<bool>,
    #[serde(default)]
    pub packet_seq: Option<u64>,
    #[serde(default)]
    pub record: Option<JsonRecord>,
}

impl TryFrom<Value> for Step {
    type Error = String;

    fn try_from(mut v: Value) -> Result<Step, String> {
        let obj = v.as_object_mut().ok_or("a step must be an object")?;
        let expect = match obj.remove("expect") {
            None => Expect::Ok,
            Some(Value::String(s)) if s == "ok" => Expect::Ok,
            Some(Value::Object(mut m)) if m.len() == 1 => match m.remove("error") {
                Some(Value::String(code)) => Expect::Error(code),
                _ => return Err("`expect` must be \"ok\" or {\"error\": CODE}".into()),
            },
            Some(_) => return Err("`expect` must be \"ok\" or {\"error\": CODE}".into()),
        };
        let note = match obj.remove("note") {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => return Err("`note` must be a string".into()),
        };
        let op = serde_json::from_value(v).map_err(|e| e.to_string())?;
        Ok(Step { op, expect, note })
    }
}

impl Op {
    fn label(&self) -> String {
        match self {
            Op::Load { file } => format!("load {file}"),
            Op::Create { definition, id, anticipation } => {
                format!("create {id} from {definition}{}", if *anticipation { "" } else { " (no anticipation)" })
            }
            Op::Start { activity, .. } => format!("start {activity}"),
            Op::Terminate { activity, .. } => format!("terminate {activity}"),
            Op::Emit { activity, to, feedback, .. } => {
                format!("emit {activity} -> {to}{}", if *feedback { " (feedback)" } else { "" })
            }
            Op::Cancel { activity } => format!("cancel {activity}"),
            Op::ExpectStates { .. } => "check states".into(),
            Op::ExpectWorklist { actor: Some(a), .. } => format!("check worklist of {a}"),
            Op::ExpectWorklist { .. } => "check worklist".into(),
            Op::ExpectInputs { activity, .. } => format!("check inputs of {activity}"),
            Op::ExpectStatus { .. } => "check status".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
}

/// First point where the run diverged from the script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioMismatch {
    /// 1-based step number, or `None` for a transcript divergence.
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for ScenarioMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(n) => write!(f, "ScenarioMismatch at step {n}: {}", self.message),
            None => write!(f, "ScenarioMismatch in transcript: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptLine {
    pub step: usize,
    pub action: String,
    /// `ok` or the error code.
    pub outcome: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub scenario: String,
    pub lines: Vec<TranscriptLine>,
    /// The event log of every instance created, in order, without timestamps.
    pub events: Vec<Value>,
    pub mismatch: Option<ScenarioMismatch>,
}

impl Transcript {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{:>3} {:<4} {} -> {}", l.step, if l.pass { "ok" } else { "FAIL" }, l.action, l.outcome)?;
        }
        match &self.mismatch {
            None => write!(f, "PASS {} ({} steps, {} events)", self.scenario, self.lines.len(), self.events.len()),
            Some(m) => write!(f, "FAIL {}: {m}", self.scenario),
        }
    }
}

fn unreadable(path: &Path, reason: impl ToString) -> ScenarioError {
    ScenarioError::Unreadable { path: path.to_owned(), reason: reason.to_string() }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| unreadable(path, e))?;
    serde_json::from_str(&text).map_err(|e| unreadable(path, e))
}

/// Reads an expected transcript file: one JSON event per line.
pub fn load_transcript(path: &Path) -> Result<Vec<Value>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| unreadable(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| unreadable(path, e)))
        .collect()
}

/// Event as it appears in transcripts.
pub fn untimed(ev: &EngineEvent) -> Value {
    let mut v = serde_json::to_value(ev).expect("events serialize");
    if let Some(m) = v.as_object_mut() {
        m.remove("at");
    }
    v
}

pub fn run_script(path: &Path) -> Result<Transcript, ScenarioError> {
    let scenario = load_scenario(path)?;
    run_scenario(&scenario, path.parent().unwrap_or(Path::new(".")))
}

/// Runs `scenario`, resolving file names against `base`.
pub fn run_scenario(scenario: &Scenario, base: &Path) -> Result<Transcript, ScenarioError> {
    let tick = Arc::new(AtomicU64::new(0));
    let clock = Arc::clone(&tick);
    let svc = Service::in_memory(Box::new(move || clock.fetch_add(1, Ordering::Relaxed) + 1));
    let mut run = Run { svc, base, created: Vec::new() };
    let mut transcript =
        Transcript { scenario: scenario.name.clone(), lines: Vec::new(), events: Vec::new(), mismatch: None };

    for (i, step) in scenario.steps.iter().enumerate() {
        let n = i + 1;
        let result = run.perform(&step.op)?;
        let (outcome, problem) = match (&result, &step.expect) {
            (Ok(()), Expect::Ok) => ("ok".to_owned(), None),
            (Err(Failure::Api(e)), Expect::Error(code)) if e.code == *code => (e.code.clone(), None),
            (Err(Failure::Api(e)), Expect::Error(code)) => {
                (e.code.clone(), Some(format!("expected {code}, got {}: {}", e.code, e.message)))
            }
            (Err(Failure::Api(e)), Expect::Ok) => {
                (e.code.clone(), Some(format!("unexpected {}: {}", e.code, e.message)))
            }
            (Err(Failure::Check(msg)), _) => ("check failed".to_owned(), Some(msg.clone())),
            (Ok(()), Expect::Error(code)) => {
                ("ok".to_owned(), Some(format!("expected {code}, but the action succeeded")))
            }
        };
        transcript.lines.push(TranscriptLine { step: n, action: step.op.label(), outcome, pass: problem.is_none() });
        if let Some(message) = problem {
            transcript.mismatch = Some(ScenarioMismatch { step: Some(n), message });
            break;
        }
    }

    for id in &run.created {
        let events = run.svc.events_after(id, 0).expect("created instances exist");
        transcript.events.extend(events.iter().map(untimed));
    }
    if transcript.mismatch.is_none() {
        if let Some(file) = &scenario.transcript {
            let expected = load_transcript(&base.join(file))?;
            transcript.mismatch = compare_events(&expected, &transcript.events);
        }
    }
    Ok(transcript)
}

fn compare_events(expected: &[Value], actual: &[Value]) -> Option<ScenarioMismatch> {
    let diverge = |message| Some(ScenarioMismatch { step: None, message });
    for (i, (e, a)) in expected.iter().zip(actual).enumerate() {
        if e != a {
            return diverge(format!("event {} differs: expected {e}, got {a}", i + 1));
        }
    }
    match expected.len().cmp(&actual.len()) {
        std::cmp::Ordering::Less => diverge(format!("unexpected extra event {}", actual[expected.len()])),
        std::cmp::Ordering::Greater => diverge(format!("missing event {}", expected[actual.len()])),
        std::cmp::Ordering::Equal => None,
    }
}

enum Failure {
    Api(ApiError),
    Check(String),
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Failure {
        Failure::Api(e)
    }
}

struct Run<'a> {
    svc: Service,
    base: &'a Path,
    created: Vec<String>,
}

impl Run<'_> {
    fn current(&self) -> Result<&str, Failure> {
        self.created.last().map(String::as_str).ok_or_else(|| Failure::Check("no instance created yet".into()))
    }

    fn act(&self, action: Action) -> Result<(), Failure> {
        self.svc.act(self.current()?, &action)?;
        Ok(())
    }

    fn perform(&mut self, op: &Op) -> Result<Result<(), Failure>, ScenarioError> {
        let outcome = match op {
            Op::Load { file } => {
                let path = self.base.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| unreadable(&path, e))?;
                self.svc.load_definition(&text).map(drop).map_err(Failure::from)
            }
            Op::Create { definition, id, anticipation } => {
                match self.svc.create_instance(definition, Some(id), *anticipation) {
                    Ok((id, _)) => {
                        self.created.push(id);
                        Ok(())
                    }
                    Err(e) => Err(e.into()),
                }
            }
            Op::Start { activity, actor } => {
                self.act(Action::Start { activity: activity.clone(), actor: actor.clone() })
            }
            Op::Terminate { activity, output } => {
                self.act(Action::Terminate { activity: activity.clone(), output: output.clone() })
            }
            Op::Emit { activity, to, feedback, record } => self.act(Action::Emit {
                activity: activity.clone(),
                to: to.clone(),
                feedback: *feedback,
                record: record.clone(),
            }),
            Op::Cancel { activity } => self.act(Action::Cancel { activity: activity.clone() }),
            Op::ExpectStates { states } => self.check_states(states),
            Op::ExpectWorklist { actor, worklist } => self.check_worklist(actor.as_deref(), worklist),
            Op::ExpectInputs { activity, inputs } => self.check_inputs(activity, inputs),
            Op::ExpectStatus { status, anticipated } => self.check_status(*status, *anticipated),
        };
        Ok(outcome)
    }

    fn check_states(&self, states: &BTreeMap<String, ActivityState>) -> Result<(), Failure> {
        let summary = self.svc.summary(self.current()?)?;
        for (name, want) in states {
            let got = summary.activities.iter().find(|a| a.name == *name).map(|a| a.state);
            if got != Some(*want) {
                let got = got.map_or("absent".to_owned(), |s| s.to_string());
                return Err(Failure::Check(format!("{name} is {got}, expected {want}")));
            }
        }
        Ok(())
    }

    fn check_worklist(&self, actor: Option<&str>, want: &Worklist) -> Result<(), Failure> {
        let got = self.svc.worklist(self.current()?, actor)?;
        if got != *want {
            return Err(Failure::Check(format!("worklist is {got:?}, expected {want:?}")));
        }
        Ok(())
    }

    fn check_inputs(&self, activity: &str, want: &[InputExpectation]) -> Result<(), Failure> {
        let view = self.svc.inputs(self.current()?, activity)?;
        if view.inputs.len() != want.len() {
            return Err(Failure::Check(format!(
                "{activity} has {} inputs, expected {}",
                view.inputs.len(),
                want.len()
            )));
        }
        for w in want {
            let Some(got) = view.input_from(&w.from, w.feedback) else {
                return Err(Failure::Check(format!("{activity} has no input from {}", w.from)));
            };
            let record = pbio::json::record_to_json(&got.record);
            let mismatched = w.provenance.is_some_and(|p| p != got.provenance)
                || w.stale.is_some_and(|s| s != got.stale)
                || w.packet_seq.is_some_and(|s| s != got.packet_seq)
                || w.record.as_ref().is_some_and(|r| *r != record);
            if mismatched {
                return Err(Failure::Check(format!(
                    "input of {activity} from {} is packet {} {:?} (stale {}) {}",
                    w.from,
                    got.packet_seq,
                    got.provenance,
                    got.stale,
                    Value::Object(record)
                )));
            }
        }
        Ok(())
    }

    fn check_status(&self, status: InstanceStatus, anticipated: Option<usize>) -> Result<(), Failure> {
        let s = self.svc.summary(self.current()?)?;
        if s.status != status || anticipated.is_some_and(|a| a != s.anticipated) {
            return Err(Failure::Check(format!(
                "status {:?} with {} anticipated, expected {status:?}{}",
                s.status,
                s.anticipated,
                anticipated.map_or(String::new(), |a| format!(" with {a} anticipated"))
            )));
        }
        Ok(())
    }
}
