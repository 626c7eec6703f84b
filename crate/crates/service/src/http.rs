//! HTTP/JSON routes. Bodies are parsed by hand so that every failure,
//! malformed JSON included, comes back as an [`ApiError`] body.

use std::collections::{HashMap, VecDeque};
use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;
use wf_core::engine::EngineEvent;

use crate::error::ApiError;
use crate::service::{Action, Service};

type Shared = Arc<Service>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(svc: Shared) -> Router {
    Router::new()
        .route("/definitions", post(post_definition))
        .route("/definitions/{name}", get(get_definition))
        .route("/instances", post(post_instance).get(list_instances))
        .route("/instances/{id}", get(get_instance))
        .route("/instances/{id}/worklist", get(get_worklist))
        .route("/instances/{id}/activities/{name}/{action}", post(post_action))
        .route("/instances/{id}/inputs/{name}", get(get_inputs))
        .route("/instances/{id}/events", get(get_events))
        .fallback(|| async { ApiError::new(404, "NotFound", "no such route") })
        .method_not_allowed_fallback(|| async { ApiError::new(405, "MethodNotAllowed", "method not allowed") })
        .layer(CorsLayer::permissive())
        .with_state(svc)
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    let body = if body.iter().all(u8::is_ascii_whitespace) { b"{}".as_slice() } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

/// Runs a blocking service call (they may sync to disk) off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| Err(ApiError::new(500, "Internal", e.to_string())))
}

async fn post_definition(State(svc): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?.to_owned();
    let def = blocking(move || svc.load_definition(&text)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "name": def.name, "version": def.version }))).into_response())
}

async fn get_definition(State(svc): State<Shared>, Path(name): Path<String>) -> ApiResult<Response> {
    let def = svc.definition(&name)?;
    Ok(Json(&*def).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewInstance {
    definition: String,
    #[serde(default)]
    id: Option<String>,
    #[serde(default = "yes")]
    anticipation: bool,
}

fn yes() -> bool {
    true
}

async fn post_instance(State(svc): State<Shared>, body: Bytes) -> ApiResult<Response> {
    let req: NewInstance = parse(&body)?;
    let (id, _) = blocking(move || svc.create_instance(&req.definition, req.id.as_deref(), req.anticipation)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

async fn list_instances(State(svc): State<Shared>) -> Json<Vec<String>> {
    Json(svc.instance_ids())
}

async fn get_instance(State(svc): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(svc.summary(&id)?).into_response())
}

async fn get_worklist(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let actor = q.get("actor").filter(|a| !a.is_empty());
    Ok(Json(svc.worklist(&id, actor.map(String::as_str))?).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StartBody {
    #[serde(default)]
    actor: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TerminateBody {
    #[serde(default)]
    output: pbio::json::JsonRecord,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRef {
    to: String,
    #[serde(default)]
    feedback: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmitBody {
    edge: EdgeRef,
    record: pbio::json::JsonRecord,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

async fn post_action(
    State(svc): State<Shared>,
    Path((id, activity, verb)): Path<(String, String, String)>,
    body: Bytes,
) -> ApiResult<Response> {
    let action = match verb.as_str() {
        "start" => Action::Start { activity, actor: parse::<StartBody>(&body)?.actor },
        "terminate" => Action::Terminate { activity, output: parse::<TerminateBody>(&body)?.output },
        "cancel" => {
            parse::<Empty>(&body)?;
            Action::Cancel { activity }
        }
        "emit" => {
            let b: EmitBody = parse(&body)?;
            Action::Emit { activity, to: b.edge.to, feedback: b.edge.feedback, record: b.record }
        }
        _ => return Err(ApiError::new(404, "NotFound", format!("no action `{verb}`"))),
    };
    let events = blocking(move || svc.act(&id, &action)).await?;
    Ok(Json(json!({ "events": events })).into_response())
}

async fn get_inputs(State(svc): State<Shared>, Path((id, name)): Path<(String, String)>) -> ApiResult<Response> {
    Ok(Json(svc.inputs(&id, &name)?).into_response())
}

fn number(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<u64>> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| ApiError::bad_request(format!("`{key}` must be a non-negative integer"))))
        .transpose()
}

/// Server-sent events: every logged event with `seq` above the cursor, then
/// the live tail. The cursor is the larger of `from` and `Last-Event-ID`.
/// With `follow=false`, or once the server shuts down, the stream ends after
/// the history is delivered.
async fn get_events(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let from = number(&q, "from")?.unwrap_or(0);
    let resume = headers.get("last-event-id").and_then(|v| v.to_str().ok()?.trim().parse::<u64>().ok());
    let follow = !matches!(q.get("follow").map(String::as_str), Some("false" | "0"));
    let cursor = from.max(resume.unwrap_or(0));
    let rx = svc.subscribe(&id)?;
    let stream = event_stream(svc, id, cursor, rx, follow);
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()).into_response())
}

struct Tail {
    svc: Shared,
    id: String,
    cursor: u64,
    rx: tokio::sync::watch::Receiver<u64>,
    closing: tokio::sync::watch::Receiver<bool>,
    pending: VecDeque<EngineEvent>,
    follow: bool,
}

fn event_stream(
    svc: Shared,
    id: String,
    cursor: u64,
    rx: tokio::sync::watch::Receiver<u64>,
    follow: bool,
) -> impl Stream<Item = Result<Event, Infallible>> {
    let closing = svc.closing();
    let tail = Tail { svc, id, cursor, rx, closing, pending: VecDeque::new(), follow };
    stream::unfold(tail, |mut t| async move {
        loop {
            if let Some(ev) = t.pending.pop_front() {
                t.cursor = ev.seq;
                let data = serde_json::to_string(&ev).unwrap_or_default();
                return Some((Ok(Event::default().id(ev.seq.to_string()).data(data)), t));
            }
            match t.svc.events_after(&t.id, t.cursor) {
                Ok(events) if !events.is_empty() => t.pending.extend(events),
                Ok(_) if t.follow && !*t.closing.borrow() => {
                    tokio::select! {
                        changed = t.rx.changed() => changed.ok()?,
                        _ = t.closing.changed() => return None,
                    }
                }
                _ => return None,
            }
        }
    })
}

/// Shape of a successful action response.
pub fn events_of(body: &Value) -> Option<Vec<EngineEvent>> {
    serde_json::from_value(body.get("events")?.clone()).ok()
}
