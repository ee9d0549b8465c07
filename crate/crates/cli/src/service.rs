//! HTTP run service.
//!
//! Each accepted run gets its own worker thread and a feedback mailbox.
//! Handlers only read snapshots and enqueue into mailboxes; the worker
//! drains the mailbox between iterations.

use std::collections::HashMap;
use std::sync::{mpsc, Arc, Mutex};

use ansatz_forge::search::{FeedbackEvent, SearchStatus};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use crate::commands::iteration_qasm;
use crate::runs::{execute, prepare, RunRecord, RunRequest, RunStore};
use crate::AppError;

struct Slot {
    record: Arc<RunRecord>,
    /// Present while the worker is running.
    mailbox: Option<mpsc::Sender<FeedbackEvent>>,
}

pub struct ServiceState {
    store: RunStore,
    runs: Mutex<HashMap<String, Slot>>,
}

impl ServiceState {
    /// Loads the run directory, marking runs a previous process left
    /// running as aborted.
    pub fn open(store: RunStore) -> Result<Arc<Self>, AppError> {
        let runs = store
            .recover()?
            .into_iter()
            .map(|r| (r.run_id.clone(), Slot { record: Arc::new(r), mailbox: None }))
            .collect();
        Ok(Arc::new(Self { store, runs: Mutex::new(runs) }))
    }

    fn snapshot(&self, id: &str) -> Option<Arc<RunRecord>> {
        self.runs.lock().expect("run table lock").get(id).map(|s| Arc::clone(&s.record))
    }
}

type Shared = Arc<ServiceState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/iterations/{k}/qasm", get(get_qasm))
        .route("/runs/{id}/feedback", post(post_feedback))
        .route("/runs/{id}/decision", post(post_decision))
        .route("/runs/{id}/events", get(get_events))
        .with_state(state)
}

/// Serves on `listener` until the process exits.
pub async fn serve(listener: tokio::net::TcpListener, store: RunStore) -> Result<(), AppError> {
    let state = ServiceState::open(store)?;
    let addr = listener.local_addr().map_err(|e| AppError::io("listener", e))?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, router(state)).await.map_err(|e| AppError::io("listener", e))
}

fn error(status: StatusCode, kind: &str, message: impl Into<String>) -> Response {
    let body = json!({ "error": { "kind": kind, "message": message.into() } });
    (status, Json(body)).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, "not_found", format!("run {id} not found"))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body)
        .map_err(|e| error(StatusCode::BAD_REQUEST, "input", format!("invalid request body: {e}")))
}

async fn create_run(State(state): State<Shared>, body: Bytes) -> Response {
    let req: RunRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let run = match prepare(req) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.kind(), e.to_string()),
    };
    if let Err(e) = state.store.save(&run.record) {
        return error(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string());
    }
    let id = run.record.run_id.clone();
    let (tx, mut rx) = mpsc::channel();
    state.runs.lock().expect("run table lock").insert(
        id.clone(),
        Slot { record: Arc::new(run.record.clone()), mailbox: Some(tx) },
    );

    let worker_state = Arc::clone(&state);
    std::thread::spawn(move || {
        let publish = |record: &RunRecord, finished: bool| {
            if let Err(e) = worker_state.store.save(record) {
                log::error!("could not persist run {}: {e}", record.run_id);
            }
            let mut runs = worker_state.runs.lock().expect("run table lock");
            if let Some(slot) = runs.get_mut(&record.run_id) {
                slot.record = Arc::new(record.clone());
                if finished {
                    slot.mailbox = None;
                }
            }
        };
        let record = execute(run, &mut rx, &mut |r| publish(r, false));
        publish(&record, true);
        log::info!("run {} ended with status {:?}", record.run_id, record.status);
    });

    (StatusCode::CREATED, Json(json!({ "run_id": id, "status": SearchStatus::Running }))).into_response()
}

async fn list_runs(State(state): State<Shared>) -> Response {
    let mut records: Vec<Arc<RunRecord>> =
        state.runs.lock().expect("run table lock").values().map(|s| Arc::clone(&s.record)).collect();
    records.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.run_id.cmp(&b.run_id)));
    let runs: Vec<_> = records.iter().map(|r| r.summary()).collect();
    Json(json!({ "runs": runs })).into_response()
}

async fn get_run(State(state): State<Shared>, Path(id): Path<String>) -> Response {
    match state.snapshot(&id) {
        Some(r) => Json(&*r).into_response(),
        None => not_found(&id),
    }
}

async fn get_qasm(State(state): State<Shared>, Path((id, k)): Path<(String, usize)>) -> Response {
    let Some(record) = state.snapshot(&id) else {
        return not_found(&id);
    };
    match iteration_qasm(&record, k) {
        Some(Ok(text)) => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response(),
        Some(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string()),
        None => error(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("run {id} has no evaluated design for iteration {k}"),
        ),
    }
}

/// Queues `event` for the run's worker. 409 once the run has ended.
fn enqueue(state: &ServiceState, id: &str, event: FeedbackEvent) -> Response {
    let runs = state.runs.lock().expect("run table lock");
    let Some(slot) = runs.get(id) else {
        return not_found(id);
    };
    let sent = match &slot.mailbox {
        Some(tx) if !slot.record.status.is_terminal() => tx.send(event.clone()).is_ok(),
        _ => false,
    };
    if !sent {
        return error(
            StatusCode::CONFLICT,
            "conflict",
            format!("run {id} is {:?} and no longer accepts feedback", slot.record.status),
        );
    }
    (StatusCode::ACCEPTED, Json(json!({ "queued": event }))).into_response()
}

#[derive(Deserialize)]
struct FeedbackBody {
    text: String,
}

async fn post_feedback(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    if state.snapshot(&id).is_none() {
        return not_found(&id);
    }
    let body: FeedbackBody = match parse_body(&body) {
        Ok(b) => b,
        Err(resp) => return resp,
    };
    let text = body.text.trim().to_string();
    if text.is_empty() {
        return error(StatusCode::BAD_REQUEST, "input", "feedback text is empty");
    }
    enqueue(&state, &id, FeedbackEvent::Note { text })
}

/// `{"iteration": k, "accept": bool}` or `{"iteration": k, "decision": "accept" | "reject"}`.
#[derive(Deserialize)]
struct DecisionBody {
    iteration: usize,
    accept: Option<bool>,
    decision: Option<String>,
}

async fn post_decision(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> Response {
    let Some(record) = state.snapshot(&id) else {
        return not_found(&id);
    };
    let body: DecisionBody = match parse_body(&body) {
        Ok(b) => b,
        Err(resp) => return resp,
    };
    let accept = match (body.accept, body.decision.as_deref()) {
        (Some(a), None) => a,
        (None, Some("accept")) => true,
        (None, Some("reject")) => false,
        _ => {
            return error(
                StatusCode::BAD_REQUEST,
                "input",
                "give either \"accept\": bool or \"decision\": \"accept\" | \"reject\"",
            )
        }
    };
    if record.status.is_terminal() {
        return error(
            StatusCode::CONFLICT,
            "conflict",
            format!("run {id} is {:?} and no longer accepts decisions", record.status),
        );
    }
    if record.report.history.entry_for_iteration(body.iteration).is_none() {
        return error(
            StatusCode::UNPROCESSABLE_ENTITY,
            "input",
            format!("iteration {} has not been evaluated", body.iteration),
        );
    }
    enqueue(&state, &id, FeedbackEvent::Decision { iteration: body.iteration, accept })
}

#[derive(Deserialize)]
struct EventsQuery {
    #[serde(default)]
    since: usize,
}

/// History entries with iteration above `since`. Normalized scores of
/// older entries shift as the history grows; `GET /runs/{id}` has the
/// current ones.
async fn get_events(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<EventsQuery>,
) -> Response {
    let Some(record) = state.snapshot(&id) else {
        return not_found(&id);
    };
    let entries: Vec<_> =
        record.report.history.entries.iter().filter(|e| e.iteration > q.since).collect();
    let latest = record.report.history.entries.iter().map(|e| e.iteration).max().unwrap_or(0);
    Json(json!({
        "run_id": record.run_id,
        "status": record.status,
        "since": q.since,
        "latest": latest,
        "entries": entries,
        "feedback_notes": record.report.history.feedback_notes,
        "best": record.report.best,
    }))
    .into_response()
}
