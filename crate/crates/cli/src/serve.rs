//! HTTP API over live simulation sessions, plus optional static UI assets.
//!
//! Each session is guarded by its own lock. A request that would mutate a
//! session while another request holds it is rejected with 409 rather than
//! queued, so a client never has a fire silently applied after a newer one.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use tower_http::services::ServeDir;
use tsm_core::analysis::{explore, export_graph, questions_report, undefined_prompt, GraphFormat, Universe};
use tsm_core::model::enabled_actions;
use tsm_core::trace::action_from_json;
use tsm_core::{Model, Session, StepOutcome};

use crate::commands::EXIT_OK;
use crate::render::{action_json, env_json, model_summary};

/// Sessions untouched for this long are dropped.
pub const SESSION_IDLE_LIMIT: Duration = Duration::from_secs(30 * 60);
/// Upper bound on `maxStates` accepted from clients.
pub const MAX_STATES_LIMIT: usize = 100_000;
const DEFAULT_MAX_STATES: usize = 10_000;

struct Slot {
    session: Arc<tokio::sync::Mutex<Session>>,
    last_used: Mutex<Instant>,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().expect("clock lock") = Instant::now();
    }

    fn idle_for(&self) -> Duration {
        self.last_used.lock().expect("clock lock").elapsed()
    }
}

pub struct AppState {
    model: Arc<Model>,
    universe: Universe,
    idle_limit: Duration,
    sessions: Mutex<HashMap<String, Arc<Slot>>>,
}

impl AppState {
    pub fn new(model: Model, universe: Universe) -> Arc<Self> {
        Self::with_idle_limit(model, universe, SESSION_IDLE_LIMIT)
    }

    pub fn with_idle_limit(model: Model, universe: Universe, idle_limit: Duration) -> Arc<Self> {
        Arc::new(AppState { model: Arc::new(model), universe, idle_limit, sessions: Mutex::new(HashMap::new()) })
    }

    /// Drops every session idle past the limit.
    pub fn sweep(&self) {
        let limit = self.idle_limit;
        self.sessions.lock().expect("session table lock").retain(|_, slot| slot.idle_for() < limit);
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session table lock").len()
    }

    /// Holds a session's lock, as a long-running request would.
    pub async fn hold_session(&self, id: &str) -> Option<tokio::sync::OwnedMutexGuard<Session>> {
        let session = self.sessions.lock().expect("session table lock").get(id)?.session.clone();
        Some(session.lock_owned().await)
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        let mut table = self.sessions.lock().expect("session table lock");
        let slot = table.get(id).cloned().ok_or_else(|| ApiError::not_found(id))?;
        if slot.idle_for() >= self.idle_limit {
            table.remove(id);
            return Err(ApiError::not_found(id));
        }
        slot.touch();
        Ok(slot)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, message: message.into() }
    }

    fn not_found(id: &str) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, message: format!("unknown session {id}") }
    }

    fn busy() -> Self {
        ApiError { status: StatusCode::CONFLICT, message: "session is busy with another request".into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.message}))).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/model", get(model))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/fire", post(fire))
        .route("/api/sessions/{id}/undo", post(undo))
        .route("/api/sessions/{id}/reset", post(reset))
        .route("/api/graph", get(graph))
        .route("/api/questions", get(questions))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn session_view(id: &str, session: &Session, universe: &Universe) -> Value {
    let model = session.model();
    let enabled: Vec<Value> =
        enabled_actions(model, session.current(), universe).iter().map(|a| action_json(model, a)).collect();
    json!({
        "sessionId": id,
        "state": env_json(session.current()),
        "canonical": session.current().canonical(),
        "observable": session.observable().ok().map(|y| env_json(&y)),
        "enabled": enabled,
        "historyLength": session.history_len(),
    })
}

async fn model(State(app): State<Arc<AppState>>) -> Json<Value> {
    let mut summary = model_summary(&app.model);
    if let Ok(init) = tsm_core::model::initial_state(&app.model) {
        summary["initial"] = env_json(&init);
    }
    Json(summary)
}

async fn create_session(State(app): State<Arc<AppState>>) -> Result<(StatusCode, Json<Value>), ApiError> {
    let session = Session::new(app.model.clone()).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let id = uuid::Uuid::new_v4().to_string();
    let view = session_view(&id, &session, &app.universe);
    let slot = Slot { session: Arc::new(tokio::sync::Mutex::new(session)), last_used: Mutex::new(Instant::now()) };
    app.sessions.lock().expect("session table lock").insert(id, Arc::new(slot));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let slot = app.slot(&id)?;
    let session = slot.session.lock().await;
    Ok(Json(session_view(&id, &session, &app.universe)))
}

#[derive(Deserialize)]
struct FireBody {
    action: String,
    #[serde(default)]
    args: Map<String, Value>,
}

async fn fire(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let slot = app.slot(&id)?;
    let body: FireBody =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))?;
    let action = action_from_json(&app.model, &body.action, &body.args).map_err(ApiError::bad_request)?;
    let mut session = slot.session.try_lock().map_err(|_| ApiError::busy())?;
    let before = session.current().canonical();
    let response = match session.fire(&action) {
        Ok(StepOutcome::Fired { rule, next, observable }) => json!({
            "outcome": "fired",
            "rule": rule,
            "state": env_json(&next),
            "canonical": next.canonical(),
            "observable": env_json(&observable),
        }),
        Ok(StepOutcome::Undefined) => json!({
            "outcome": "undefined",
            "question": undefined_prompt(&action.name, &before),
            "state": env_json(session.current()),
            "canonical": before,
        }),
        Err(e) => json!({
            "outcome": "error",
            "error": e.to_string(),
            "state": env_json(session.current()),
            "canonical": before,
        }),
    };
    Ok(Json(response))
}

async fn undo(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let slot = app.slot(&id)?;
    let mut session = slot.session.try_lock().map_err(|_| ApiError::busy())?;
    session.undo().map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(session_view(&id, &session, &app.universe)))
}

async fn reset(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let slot = app.slot(&id)?;
    let mut session = slot.session.try_lock().map_err(|_| ApiError::busy())?;
    session.reset();
    Ok(Json(session_view(&id, &session, &app.universe)))
}

/// Universe and state bound from `ids`, `maxList` and `maxStates`.
fn bounds(app: &AppState, query: &HashMap<String, String>) -> Result<(Universe, usize), ApiError> {
    let mut universe = app.universe.clone();
    if let Some(ids) = query.get("ids") {
        universe.id_pool = ids.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    }
    let number = |key: &str| -> Result<Option<usize>, ApiError> {
        query
            .get(key)
            .map(|v| v.parse::<usize>().map_err(|_| ApiError::bad_request(format!("{key} must be a non-negative integer"))))
            .transpose()
    };
    if let Some(n) = number("maxList")? {
        universe.max_list_len = n;
    }
    let max_states = number("maxStates")?.unwrap_or(DEFAULT_MAX_STATES);
    if max_states > MAX_STATES_LIMIT {
        return Err(ApiError::bad_request(format!("maxStates may be at most {MAX_STATES_LIMIT}")));
    }
    Ok((universe, max_states))
}

async fn graph(State(app): State<Arc<AppState>>, Query(query): Query<HashMap<String, String>>) -> ApiResult {
    let (universe, max_states) = bounds(&app, &query)?;
    let model = app.model.clone();
    let text = tokio::task::spawn_blocking(move || {
        explore(&model, &universe, max_states).map(|e| export_graph(&e, GraphFormat::Json))
    })
    .await
    .map_err(|e| ApiError::bad_request(e.to_string()))?
    .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let value = serde_json::from_str(&text).expect("graph export is JSON");
    Ok(Json(value))
}

async fn questions(State(app): State<Arc<AppState>>, Query(query): Query<HashMap<String, String>>) -> ApiResult {
    let (universe, max_states) = bounds(&app, &query)?;
    let model = app.model.clone();
    let report = tokio::task::spawn_blocking(move || {
        let e = explore(&model, &universe, max_states)?;
        questions_report(&model, &e)
    })
    .await
    .map_err(|e| ApiError::bad_request(e.to_string()))?
    .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(Json(serde_json::to_value(report).expect("report serializes")))
}

/// Binds `host:port` and serves until interrupted.
pub fn serve(
    model: Model,
    universe: Universe,
    host: &str,
    port: u16,
    ui_dir: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<u8> {
    let runtime = tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("cannot listen on {host}:{port}"))?;
        let name = model.name.clone();
        let state = AppState::new(model, universe);
        let sweeper = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(60));
            loop {
                tick.tick().await;
                sweeper.sweep();
            }
        });
        writeln!(out, "serving {name} on http://{}", listener.local_addr()?)?;
        out.flush()?;
        axum::serve(listener, router(state, ui_dir))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(EXIT_OK)
    })
}
