//! HTTP play service: a human plays Fibonacci nim or power-of-two nim
//! against the engine.
//!
//! | route | body | reply |
//! |---|---|---|
//! | `POST /api/session` | [`NewSession`] | [`SessionView`] |
//! | `GET /api/session/{id}` | | [`SessionView`] |
//! | `POST /api/session/{id}/move` | [`MoveRequest`] | [`SessionView`] with the engine reply applied |
//! | `GET /api/session/{id}/hint` | | [`Hint`] |
//! | `GET /api/health` | | `{"status": "ok", "sessions": n}` |
//!
//! Errors are [`ErrorBody`] JSON. Anything else is served from the static
//! directory when one is configured.

pub mod error;
pub mod session;

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use fibnim_core::Solver;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;
use uuid::Uuid;

pub use error::{ErrorBody, ServiceError};
pub use session::{Hint, NewSession, Session, SessionView};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub static_dir: Option<PathBuf>,
    /// Sessions are written here on shutdown and read back on start.
    pub snapshot: Option<PathBuf>,
    /// Idle sessions older than this are dropped.
    pub ttl: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            static_dir: None,
            snapshot: None,
            ttl: Duration::from_secs(6 * 3600),
        }
    }
}

/// Body of `POST /api/session/{id}/move`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRequest {
    pub pile_index: usize,
    pub take: u64,
}

type SessionSlot = Arc<Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<Uuid, SessionSlot>>>,
    solver: Arc<Mutex<Solver>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self::with_solver(config, Solver::from_env())
    }

    pub fn with_solver(config: ServiceConfig, solver: Solver) -> Self {
        AppState {
            sessions: Arc::default(),
            solver: Arc::new(Mutex::new(solver)),
            config: Arc::new(config),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn table(&self) -> std::sync::MutexGuard<'_, HashMap<Uuid, SessionSlot>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn session_count(&self) -> usize {
        self.table().len()
    }

    fn slot(&self, id: &str) -> Result<SessionSlot, ServiceError> {
        let id = Uuid::parse_str(id).map_err(|_| ServiceError::NotFound)?;
        self.table().get(&id).cloned().ok_or(ServiceError::NotFound)
    }

    // Lock one session for the duration of an operation, so moves on the
    // same session are applied one at a time.
    fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let slot = self.slot(id)?;
        let mut session = slot.lock().unwrap_or_else(|e| e.into_inner());
        session.touched = Instant::now();
        f(&mut session)
    }

    pub fn create(&self, req: NewSession) -> Result<SessionView, ServiceError> {
        let session = Session::start(Uuid::new_v4(), req, &self.solver)?;
        let view = SessionView::from(&session);
        self.table().insert(session.id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    pub fn get(&self, id: &str) -> Result<SessionView, ServiceError> {
        self.with_session(id, |s| Ok(SessionView::from(&*s)))
    }

    pub fn play(&self, id: &str, mv: MoveRequest) -> Result<SessionView, ServiceError> {
        self.with_session(id, |s| {
            s.human_move(mv.pile_index, mv.take, &self.solver)?;
            Ok(SessionView::from(&*s))
        })
    }

    pub fn hint(&self, id: &str) -> Result<Hint, ServiceError> {
        self.with_session(id, |s| s.hint(&self.solver))
    }

    /// Drop sessions idle for longer than the TTL; returns how many went.
    pub fn evict_expired(&self, now: Instant) -> usize {
        let ttl = self.config.ttl;
        let mut table = self.table();
        let before = table.len();
        table.retain(|_, slot| {
            let s = slot.lock().unwrap_or_else(|e| e.into_inner());
            now.saturating_duration_since(s.touched) <= ttl
        });
        before - table.len()
    }

    pub fn snapshot(&self) -> Vec<Session> {
        let mut sessions: Vec<Session> = self
            .table()
            .values()
            .map(|slot| slot.lock().unwrap_or_else(|e| e.into_inner()).clone())
            .collect();
        sessions.sort_by_key(|s| s.id);
        sessions
    }

    pub fn write_snapshot(&self, path: &Path) -> io::Result<()> {
        let json = serde_json::to_vec_pretty(&self.snapshot())?;
        std::fs::write(path, json)
    }

    /// Load sessions saved by [`write_snapshot`](Self::write_snapshot). A
    /// missing file loads nothing.
    pub fn load_snapshot(&self, path: &Path) -> io::Result<usize> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e),
        };
        let sessions: Vec<Session> = serde_json::from_slice(&bytes)?;
        let count = sessions.len();
        let mut table = self.table();
        for s in sessions {
            table.insert(s.id, Arc::new(Mutex::new(s)));
        }
        Ok(count)
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

async fn create(
    State(state): State<AppState>,
    payload: Result<Json<NewSession>, JsonRejection>,
) -> Result<Json<SessionView>, ServiceError> {
    state.create(body(payload)?).map(Json)
}

async fn show(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<SessionView>, ServiceError> {
    state.get(&id).map(Json)
}

async fn play(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<MoveRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ServiceError> {
    state.play(&id, body(payload)?).map(Json)
}

async fn hint(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<Hint>, ServiceError> {
    state.hint(&id).map(Json)
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "sessions": state.session_count() }))
}

async fn api_not_found() -> ServiceError {
    ServiceError::NotFound
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/session", post(create))
        .route("/api/session/{id}", get(show))
        .route("/api/session/{id}/move", post(play))
        .route("/api/session/{id}/hint", get(hint))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found));
    let app = match &state.config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.with_state(state)
}

async fn shutdown_signal() {
    // If the handler cannot be installed, run until killed.
    if tokio::signal::ctrl_c().await.is_err() {
        std::future::pending::<()>().await;
    }
}

/// Serve until Ctrl-C, evicting idle sessions in the background and writing
/// the snapshot on the way out.
pub async fn serve(listener: TcpListener, state: AppState) -> io::Result<()> {
    if let Some(path) = &state.config.snapshot {
        state.load_snapshot(path)?;
    }
    let sweeper = state.clone();
    let period = state.config.ttl.min(Duration::from_secs(60)).max(Duration::from_secs(1));
    let sweep = tokio::spawn(async move {
        let mut ticks = tokio::time::interval(period);
        loop {
            ticks.tick().await;
            sweeper.evict_expired(Instant::now());
        }
    });
    let result = axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .await;
    sweep.abort();
    if let Some(path) = &state.config.snapshot {
        state.write_snapshot(path)?;
    }
    result
}
