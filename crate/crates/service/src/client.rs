//! Blocking client for the HTTP API, used by `wfctl` and the tests.

use std::io::{BufRead, BufReader};
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;
use wf_core::engine::EngineEvent;

use crate::error::ApiError;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{0}")]
    Rejected(ApiError),
    #[error("transport: {0}")]
    Transport(String),
}

pub type ClientResult<T> = Result<T, ClientError>;

#[derive(Clone)]
pub struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    pub fn new(base: &str) -> Client {
        let agent = ureq::AgentBuilder::new().timeout_connect(Duration::from_secs(5)).build();
        Client { base: base.trim_end_matches('/').to_owned(), agent }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn finish(result: Result<ureq::Response, ureq::Error>) -> ClientResult<ureq::Response> {
        match result {
            Ok(r) => Ok(r),
            Err(ureq::Error::Status(status, r)) => {
                let text = r.into_string().unwrap_or_default();
                let mut err = serde_json::from_str::<ApiError>(&text)
                    .unwrap_or_else(|_| ApiError::new(status, "HttpError", text));
                err.status = status;
                Err(ClientError::Rejected(err))
            }
            Err(e) => Err(ClientError::Transport(e.to_string())),
        }
    }

    fn json(r: ureq::Response) -> ClientResult<Value> {
        r.into_json().map_err(|e| ClientError::Transport(e.to_string()))
    }

    pub fn get(&self, path: &str) -> ClientResult<Value> {
        Self::json(Self::finish(self.agent.get(&self.url(path)).call())?)
    }

    pub fn post(&self, path: &str, body: &Value) -> ClientResult<Value> {
        Self::json(Self::finish(self.agent.post(&self.url(path)).send_json(body))?)
    }

    pub fn post_raw(&self, path: &str, body: &str) -> ClientResult<Value> {
        let req = self.agent.post(&self.url(path)).set("content-type", "application/json");
        Self::json(Self::finish(req.send_string(body))?)
    }

    pub fn load_definition(&self, document: &str) -> ClientResult<Value> {
        self.post_raw("/definitions", document)
    }

    pub fn create_instance(&self, definition: &str, id: Option<&str>, anticipation: bool) -> ClientResult<String> {
        let mut body = json!({ "definition": definition, "anticipation": anticipation });
        if let Some(id) = id {
            body["id"] = json!(id);
        }
        let v = self.post("/instances", &body)?;
        v["id"].as_str().map(str::to_owned).ok_or_else(|| ClientError::Transport("response lacks `id`".into()))
    }

    pub fn status(&self, id: &str) -> ClientResult<Value> {
        self.get(&format!("/instances/{id}"))
    }

    pub fn worklist(&self, id: &str, actor: Option<&str>) -> ClientResult<Value> {
        match actor {
            Some(a) => {
                let r = self.agent.get(&self.url(&format!("/instances/{id}/worklist"))).query("actor", a).call();
                Self::json(Self::finish(r)?)
            }
            None => self.get(&format!("/instances/{id}/worklist")),
        }
    }

    pub fn inputs(&self, id: &str, activity: &str) -> ClientResult<Value> {
        self.get(&format!("/instances/{id}/inputs/{activity}"))
    }

    /// POSTs an activity action and returns the events it produced.
    pub fn act(&self, id: &str, activity: &str, verb: &str, body: &Value) -> ClientResult<Vec<EngineEvent>> {
        let v = self.post(&format!("/instances/{id}/activities/{activity}/{verb}"), body)?;
        crate::http::events_of(&v).ok_or_else(|| ClientError::Transport("response lacks `events`".into()))
    }

    /// Reads the event stream, handing each event to `each` until it
    /// returns false or the stream ends.
    pub fn events(
        &self,
        id: &str,
        from: u64,
        follow: bool,
        mut each: impl FnMut(EngineEvent) -> bool,
    ) -> ClientResult<()> {
        let req = self
            .agent
            .get(&self.url(&format!("/instances/{id}/events")))
            .query("from", &from.to_string())
            .query("follow", if follow { "true" } else { "false" });
        let reader = BufReader::new(Self::finish(req.call())?.into_reader());
        for line in reader.lines() {
            let line = line.map_err(|e| ClientError::Transport(e.to_string()))?;
            let Some(data) = line.strip_prefix("data:") else { continue };
            let ev = serde_json::from_str(data.trim_start()).map_err(|e| ClientError::Transport(e.to_string()))?;
            if !each(ev) {
                break;
            }
        }
        Ok(())
    }
}
