//! HTTP facade over elicitation sessions.
//!
//! | method | path                       |                                   |
//! |--------|----------------------------|-----------------------------------|
//! | POST   | `/sessions`                | create a session and run the first solve |
//! | GET    | `/sessions/{id}`           | full session state                |
//! | POST   | `/sessions/{id}/responses` | answer pending pairs              |
//! | GET    | `/sessions/{id}/ranking`   | final ranking of a finished session |
//! | GET    | `/healthz`                 | liveness                          |
//!
//! Solves run on a blocking thread. A request waits up to
//! [`ServiceConfig::solve_wait`] for the solve; past that it returns with
//! status `SOLVING` and the client polls `GET /sessions/{id}`.

pub mod api;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::sync::oneshot;

use reqprio_core::elicitation::{ElicitationSession, SessionConfig};
use reqprio_core::persistence::{self, SESSION_EXTENSION};
use reqprio_core::solver::{self, SolverInstance, DEFAULT_SOLUTION_CAP};
use reqprio_core::{Error, Issue};

use api::{CreateSession, ErrorBody, RankedItem, RankingBody, SessionState, SubmitResponses};

pub const DEFAULT_TIME_BUDGET_MS: u64 = 30_000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Directory for `.session` snapshots; `None` keeps sessions in memory.
    pub data_dir: Option<PathBuf>,
    /// How long a request waits for a solve before answering `SOLVING`.
    pub solve_wait: Duration,
    /// Per-solve time limit handed to every session.
    pub time_budget_ms: Option<u64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            solve_wait: Duration::from_secs(5),
            time_budget_ms: Some(DEFAULT_TIME_BUDGET_MS),
        }
    }
}

struct Slot {
    id: String,
    session: RwLock<ElicitationSession>,
    /// Set while a mutation (including its solve) is in flight.
    busy: AtomicBool,
    solving: AtomicBool,
    last_error: Mutex<Option<String>>,
}

impl Slot {
    fn state(&self) -> SessionState {
        let session = self.session.read().expect("session lock");
        SessionState::new(
            &self.id,
            &session,
            self.solving.load(Ordering::Acquire),
            self.last_error.lock().expect("error lock").clone(),
        )
    }

    fn try_claim(self: &Arc<Self>) -> Option<Claim> {
        self.busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| Claim(self.clone()))
    }
}

/// Releases the busy flag on drop.
struct Claim(Arc<Slot>);

impl Drop for Claim {
    fn drop(&mut self) {
        self.0.solving.store(false, Ordering::Release);
        self.0.busy.store(false, Ordering::Release);
    }
}

struct Registry {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    next_id: AtomicU64,
}

#[derive(Clone)]
pub struct AppState(Arc<Registry>);

impl AppState {
    /// Creates the registry, restoring any snapshots found in the data directory.
    pub fn new(config: ServiceConfig) -> reqprio_core::Result<Self> {
        let mut sessions = HashMap::new();
        let mut max_id = 0;
        if let Some(dir) = &config.data_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some(SESSION_EXTENSION) {
                    continue;
                }
                let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
                    continue;
                };
                let session = persistence::load_session_file(&path)?;
                if let Some(n) = id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
                    max_id = max_id.max(n);
                }
                sessions.insert(id.clone(), Arc::new(new_slot(id, session)));
            }
        }
        Ok(Self(Arc::new(Registry {
            config,
            sessions: RwLock::new(sessions),
            next_id: AtomicU64::new(max_id + 1),
        })))
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.0
            .sessions
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, slot: &Slot) -> reqprio_core::Result<()> {
        if let Some(dir) = &self.0.config.data_dir {
            let text = persistence::save_session(&slot.session.read().expect("session lock"));
            persistence::write_atomic(snapshot_path(dir, &slot.id), text.as_bytes())?;
        }
        Ok(())
    }

    /// Runs `step()` on a copy of the session in a blocking thread, then
    /// publishes it. Waits at most `solve_wait` for completion.
    async fn solve_in_background(&self, claim: Claim) {
        let slot = claim.0.clone();
        slot.solving.store(true, Ordering::Release);
        let state = self.clone();
        let (done_tx, done_rx) = oneshot::channel();
        tokio::task::spawn_blocking(move || {
            let mut working = slot.session.read().expect("session lock").clone();
            let outcome = working.step();
            match outcome {
                Ok(()) => {
                    *slot.session.write().expect("session lock") = working;
                    *slot.last_error.lock().expect("error lock") = None;
                }
                Err(e) => *slot.last_error.lock().expect("error lock") = Some(e.to_string()),
            }
            if let Err(e) = state.persist(&slot) {
                *slot.last_error.lock().expect("error lock") = Some(format!("snapshot not saved: {e}"));
            }
            drop(claim);
            let _ = done_tx.send(());
        });
        let _ = tokio::time::timeout(self.0.config.solve_wait, done_rx).await;
    }
}

fn new_slot(id: String, session: ElicitationSession) -> Slot {
    Slot {
        id,
        session: RwLock::new(session),
        busy: AtomicBool::new(false),
        solving: AtomicBool::new(false),
        last_error: Mutex::new(None),
    }
}

fn snapshot_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.{SESSION_EXTENSION}"))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/responses", post(submit))
        .route("/sessions/{id}/ranking", get(get_ranking))
        .with_state(state)
}

/// Serves on an already bound listener until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(body) = body.map_err(ApiError::bad_json)?;
    let project = body.project.into_project()?;
    if project.requirements().len() > solver::MAX_REQUIREMENTS {
        return Err(Error::TooLarge(format!(
            "{} requirements, at most {} are supported",
            project.requirements().len(),
            solver::MAX_REQUIREMENTS
        ))
        .into());
    }
    let instance = SolverInstance::from_graphs(project.ids().cloned(), project.source_graphs())?;
    if let Some(cycle) = solver::find_hard_cycle(&instance) {
        return Err(Error::Infeasible { cycle }.into());
    }
    let solution_cap = body.solution_cap.unwrap_or(DEFAULT_SOLUTION_CAP);
    if solution_cap == 0 {
        return Err(Error::Validation(vec![Issue::new("solution_cap", "must be positive")]).into());
    }
    let config = SessionConfig {
        max_eli_pair: body.budget.unwrap_or(reqprio_core::elicitation::DEFAULT_MAX_ELI_PAIR),
        solution_cap,
        time_budget_ms: state.0.config.time_budget_ms,
    };
    let id = format!("s{}", state.0.next_id.fetch_add(1, Ordering::Relaxed));
    let slot = Arc::new(new_slot(id.clone(), ElicitationSession::new(project, config)));
    let claim = slot.try_claim().expect("fresh slot is free");
    state
        .0
        .sessions
        .write()
        .expect("registry lock")
        .insert(id, slot.clone());
    state.solve_in_background(claim).await;
    Ok((StatusCode::CREATED, Json(slot.state())).into_response())
}

async fn get_state(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionState>, ApiError> {
    Ok(Json(state.slot(&id)?.state()))
}

async fn submit(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<SubmitResponses>, JsonRejection>,
) -> Result<Json<SessionState>, ApiError> {
    let slot = state.slot(&id)?;
    let Json(body) = body.map_err(ApiError::bad_json)?;
    let responses = body
        .responses
        .into_iter()
        .map(api::ResponseItem::into_response)
        .collect::<Result<Vec<_>, _>>()?;
    let claim = slot.try_claim().ok_or_else(ApiError::busy)?;
    let needs_solve = {
        let mut session = slot.session.write().expect("session lock");
        session.submit_responses(&responses)?;
        session.pending_queries().is_empty()
    };
    state.persist(&slot)?;
    if needs_solve {
        state.solve_in_background(claim).await;
    } else {
        drop(claim);
    }
    Ok(Json(slot.state()))
}

async fn get_ranking(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<RankingBody>, ApiError> {
    let slot = state.slot(&id)?;
    let view = slot.state();
    if slot.solving.load(Ordering::Acquire) {
        return Err(ApiError::not_ready("session is solving"));
    }
    let session = slot.session.read().expect("session lock");
    let ranking = session
        .final_ranking()
        .map_err(|e| ApiError::not_ready(&e.to_string()))?;
    let project = session.project();
    Ok(Json(RankingBody {
        id: id.clone(),
        status: session.status().to_string(),
        cost: session.last_result().expect("terminal session was solved").cost,
        ranking: ranking
            .order()
            .iter()
            .enumerate()
            .map(|(i, rid)| RankedItem {
                position: i + 1,
                id: rid.clone(),
                title: project.requirement(rid).map(|r| r.title.clone()).unwrap_or_default(),
            })
            .collect(),
        metrics: view.metrics,
    }))
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn not_found(id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            body: ErrorBody {
                error: "not_found",
                message: format!("no session `{id}`"),
                ..Default::default()
            },
        }
    }

    fn busy() -> Self {
        Self {
            status: StatusCode::CONFLICT,
            body: ErrorBody {
                error: "busy",
                message: "another request is updating this session".into(),
                retry: true,
                ..Default::default()
            },
        }
    }

    fn not_ready(message: &str) -> Self {
        Self {
            status: StatusCode::CONFLICT,
            body: ErrorBody {
                error: "not_terminal",
                message: message.to_owned(),
                ..Default::default()
            },
        }
    }

    fn bad_json(rejection: JsonRejection) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                error: "malformed",
                message: rejection.body_text(),
                ..Default::default()
            },
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (status, body) = match e {
            Error::Validation(issues) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: "validation",
                    message,
                    issues,
                    ..Default::default()
                },
            ),
            Error::Infeasible { cycle } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: "infeasible",
                    message,
                    cycle,
                    ..Default::default()
                },
            ),
            Error::Conflict(_) | Error::State(_) => (
                StatusCode::CONFLICT,
                ErrorBody {
                    error: "conflict",
                    message,
                    ..Default::default()
                },
            ),
            Error::UnknownRequirement(_)
            | Error::SelfLoop(_)
            | Error::UniverseMismatch(_)
            | Error::Parse(_)
            | Error::UnsupportedVersion { .. }
            | Error::TooLarge(_) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: "invalid",
                    message,
                    ..Default::default()
                },
            ),
            Error::Overflow | Error::Io(_) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    error: "internal",
                    message,
                    ..Default::default()
                },
            ),
        };
        Self { status, body }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let retry = self.body.retry;
        let mut response = (self.status, Json(self.body)).into_response();
        if retry {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, header::HeaderValue::from_static("1"));
        }
        response
    }
}
