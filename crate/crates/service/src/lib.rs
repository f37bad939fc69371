//! HTTP JSON API over in-memory diagnosis sessions.
//!
//! | method | path                     | purpose                              |
//! |--------|--------------------------|--------------------------------------|
//! | POST   | `/sessions`              | create a session from DPI text       |
//! | GET    | `/sessions/{id}`         | current diagnoses and status         |
//! | GET    | `/sessions/{id}/query`   | the pending query (cached per round) |
//! | POST   | `/sessions/{id}/answer`  | answer the pending query             |
//! | GET    | `/sessions/{id}/history` | transcript records                   |
//!
//! Requests on one session are serialized by a per-session lock; separate
//! sessions proceed independently. Sessions idle longer than the TTL are
//! dropped.

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use seqdiag::diag::Rank;
use seqdiag::qpsearch::{Measure, MeasureKind};
use seqdiag::queryselect::CriterionKind;
use seqdiag::session::{Config, PartitionRecord, Phases, Record, Session, SessionError};
use seqdiag::{Diagnosis, Dpi, DpiError};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;
use uuid::Uuid;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub ttl: Duration,
    /// Per-request budget for diagnosis computation.
    pub diagnosis_time: Duration,
    /// Static files served at `/` (the browser UI bundle), if any.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            ttl: Duration::from_secs(3600),
            diagnosis_time: Duration::from_secs(10),
            static_dir: None,
        }
    }
}

struct Entry {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<Uuid, Entry>>>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            sessions: Arc::default(),
            config: Arc::new(config),
        }
    }

    fn insert(&self, session: Session) -> Uuid {
        let id = Uuid::new_v4();
        let mut map = self.sessions.lock().unwrap();
        self.evict(&mut map);
        map.insert(
            id,
            Entry {
                session: Arc::new(Mutex::new(session)),
                last_used: Instant::now(),
            },
        );
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::not_found())?;
        let mut map = self.sessions.lock().unwrap();
        self.evict(&mut map);
        let entry = map.get_mut(&id).ok_or_else(ApiError::not_found)?;
        entry.last_used = Instant::now();
        Ok(entry.session.clone())
    }

    fn evict(&self, map: &mut HashMap<Uuid, Entry>) {
        let ttl = self.config.ttl;
        map.retain(|_, e| e.last_used.elapsed() < ttl);
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: message.into(),
                line: None,
                column: None,
            },
        }
    }

    fn not_found() -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown session")
    }
}

impl From<DpiError> for ApiError {
    fn from(e: DpiError) -> Self {
        let mut err = ApiError::new(StatusCode::BAD_REQUEST, e.to_string());
        match e {
            DpiError::Syntax { line, column, .. } => {
                err.body.line = Some(line);
                err.body.column = Some(column);
            }
            DpiError::Format { line, .. } => err.body.line = Some(line),
            _ => {}
        }
        err
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::Finished
            | SessionError::NoPendingQuery
            | SessionError::TooFewDiagnoses(_) => StatusCode::CONFLICT,
            SessionError::Diagnosis(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Body of `POST /sessions`. Every field but `dpi` is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct CreateRequest {
    pub dpi: String,
    pub n: Option<usize>,
    pub measure: Option<MeasureKind>,
    pub threshold: Option<f64>,
    pub criterion: Option<CriterionKind>,
    pub rank: Option<Rank>,
    pub enrich: Option<bool>,
    pub sigma: Option<f64>,
}

impl CreateRequest {
    fn config(&self, service: &ServiceConfig) -> Result<Config, ApiError> {
        let mut c = Config::default();
        if let Some(n) = self.n {
            if n == 0 {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, "n must be positive"));
            }
            c.n = n;
        }
        if let Some(kind) = self.measure {
            c.measure = match kind {
                MeasureKind::Ent => Measure::ent(),
                MeasureKind::Spl => Measure::spl(),
            };
        }
        if let Some(t) = self.threshold {
            c.measure = c.measure.with_threshold(t);
        }
        c.criterion = self.criterion.unwrap_or(c.criterion);
        c.rank = self.rank.unwrap_or(c.rank);
        c.enrich = self.enrich.unwrap_or(c.enrich);
        c.sigma = self.sigma.unwrap_or(c.sigma);
        c.diagnosis_time_ms = Some(service.diagnosis_time.as_millis() as u64);
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisView {
    pub ids: Vec<usize>,
    pub formulas: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub diagnoses: Vec<DiagnosisView>,
    pub finished: bool,
    pub final_diagnosis: Option<Vec<usize>>,
    pub warnings: Vec<String>,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub round: usize,
    pub query: Vec<String>,
    pub qpartition: PartitionRecord,
    pub phase_timings: Phases<f64>,
    pub reasoner_calls: Phases<u64>,
    pub measure_value: f64,
    pub goal_reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub answer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerView {
    pub eliminated: Vec<Vec<usize>>,
    pub remaining: Vec<Vec<usize>>,
    pub finished: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_diagnosis: Option<Vec<usize>>,
}

fn diagnosis_views(s: &Session) -> Vec<DiagnosisView> {
    s.diagnoses()
        .iter()
        .zip(s.probabilities())
        .map(|(d, &p)| DiagnosisView {
            ids: d.to_vec(),
            formulas: d.ids.iter().map(|id| s.dpi().formula_text(id)).collect(),
            probability: p,
        })
        .collect()
}

fn session_view(id: &str, s: &Session) -> SessionView {
    SessionView {
        id: id.to_string(),
        diagnoses: diagnosis_views(s),
        finished: s.is_finished(),
        final_diagnosis: s.final_diagnosis().map(Diagnosis::to_vec),
        warnings: s.warnings(),
        rounds: s.history().len(),
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let config = req.config(&state.config)?;
    let session = blocking(move || {
        let dpi = Dpi::parse(&req.dpi)?;
        Ok(Session::new(dpi, config)?)
    })
    .await?;
    let id = state.insert(session);
    let handle = state.get(&id.to_string())?;
    let view = session_view(&id.to_string(), &handle.lock().unwrap());
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let handle = state.get(&id)?;
    let view = session_view(&id, &handle.lock().unwrap());
    Ok(Json(view))
}

async fn get_query(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<QueryView>, ApiError> {
    let handle = state.get(&id)?;
    let view = blocking(move || {
        let mut s = handle.lock().unwrap();
        if s.is_finished() {
            return Err(ApiError::from(SessionError::Finished));
        }
        let round = s.history().len() + 1;
        let q = s.next_query()?.clone();
        Ok(QueryView {
            round,
            query: q.texts,
            qpartition: PartitionRecord::new(&q.partition, s.diagnoses()),
            phase_timings: q.timings_ms,
            reasoner_calls: q.reasoner_calls,
            measure_value: q.measure_value,
            goal_reached: q.goal_reached,
        })
    })
    .await?;
    Ok(Json(view))
}

async fn post_answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<AnswerRequest>,
) -> Result<Json<AnswerView>, ApiError> {
    let handle = state.get(&id)?;
    let view = blocking(move || {
        let mut s = handle.lock().unwrap();
        let out = s.submit_answer(req.answer)?;
        Ok(AnswerView {
            eliminated: out.eliminated.iter().map(Diagnosis::to_vec).collect(),
            remaining: out.remaining.iter().map(Diagnosis::to_vec).collect(),
            finished: out.finished,
            final_diagnosis: out.final_diagnosis.as_ref().map(Diagnosis::to_vec),
        })
    })
    .await?;
    Ok(Json(view))
}

async fn get_history(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Vec<Record>>, ApiError> {
    let handle = state.get(&id)?;
    let records = handle.lock().unwrap().history().to_vec();
    Ok(Json(records))
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/query", get(get_query))
        .route("/sessions/{id}/answer", post(post_answer))
        .route("/sessions/{id}/history", get(get_history))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(config))).await
}
