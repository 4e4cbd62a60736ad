//! HTTP service for live sessions. Sessions live in memory; requests for one
//! session are serialized by its lock, and bundles are shared read-only.

mod session;

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pragrank_core::eval::child_seed;
use pragrank_core::GlobalRanking;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::bundle::{Bundle, Domain};
use crate::error::{Error, Result};

pub use session::{
    GuessPayload, ListenerKind, Robot, RobotStatus, RobotView, Session, SessionError, SessionView, TurnEvent,
    ROBOT_LABELS,
};

pub const DATA_DIR_ENV: &str = "PRAGMA_DATA_DIR";

pub struct DomainRuntime {
    pub bundle: Bundle,
    /// The literal listener's ranking: the prior, ties by index.
    pub literal: GlobalRanking,
}

impl DomainRuntime {
    pub fn new(bundle: Bundle) -> Result<Self> {
        let literal = GlobalRanking::from_scores(bundle.prior.weights().to_vec())?;
        Ok(Self { bundle, literal })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Seeds robot assignment, stimulus order and session ids.
    pub seed: u64,
    /// Append-only log of finished robots, one replay trace per line.
    pub event_log: Option<PathBuf>,
}

pub struct AppState {
    domains: BTreeMap<Domain, DomainRuntime>,
    sessions: RwLock<HashMap<String, (Domain, Arc<Mutex<Session>>)>>,
    /// Remaining stimuli per (client, domain), drawn without replacement.
    pools: Mutex<HashMap<(String, Domain), Vec<usize>>>,
    counter: AtomicU64,
    seed: u64,
    event_log: Option<Mutex<File>>,
}

impl AppState {
    pub fn new(bundles: Vec<Bundle>, config: &ServiceConfig) -> Result<Self> {
        let domains = bundles
            .into_iter()
            .map(|b| Ok((b.domain, DomainRuntime::new(b)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let event_log = match &config.event_log {
            Some(path) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?,
            )),
            None => None,
        };
        Ok(Self {
            domains,
            sessions: RwLock::new(HashMap::new()),
            pools: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(0),
            seed: config.seed,
            event_log,
        })
    }

    pub fn domain(&self, domain: Domain) -> Option<&DomainRuntime> {
        self.domains.get(&domain)
    }

    fn session(&self, id: &str) -> Result<(Domain, Arc<Mutex<Session>>), ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown session", format!("no session `{id}`")))
    }

    fn log_finished(&self, session: &Session, bundle: &Bundle, label: &str) {
        let (Some(log), Some(line)) = (&self.event_log, session.trace_line(bundle, label)) else {
            return;
        };
        let mut file = log.lock().expect("event log lock");
        if let Err(e) = writeln!(file, "{line}") {
            eprintln!("warning: event log write failed: {e}");
        }
    }
}

/// Loads `<dir>/<domain>/` for every domain directory present.
pub fn load_bundles(dir: &Path) -> Result<Vec<Bundle>> {
    let mut out = Vec::new();
    for domain in Domain::ALL {
        let sub = dir.join(domain.name());
        if sub.join(crate::bundle::LEXICON_FILE).exists() {
            out.push(Bundle::load(&sub, domain)?);
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> Self {
        Self {
            status,
            error,
            detail: detail.into(),
        }
    }

    fn malformed(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed request", detail)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::UnknownRobot(r) => ApiError::malformed(format!("unknown robot `{r}`; use green or blue")),
            SessionError::Terminal { robot, status } => ApiError::new(
                StatusCode::CONFLICT,
                "robot finished",
                format!("the {robot} robot is {}", status.name()),
            ),
            SessionError::Malformed(m) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed utterance", m),
            SessionError::Inconsistent => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "inconsistent example",
                "the target program does not produce this example",
            ),
            SessionError::InProgress => ApiError::new(
                StatusCode::CONFLICT,
                "session in progress",
                "robot identities are revealed once both robots are finished",
            ),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.error, "detail": self.detail}))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn body<T: for<'de> Deserialize<'de>>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::malformed(e.to_string()))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/domains", get(list_domains))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/examples", post(submit_example))
        .route("/sessions/{id}/giveup", post(give_up))
        .route("/sessions/{id}/reveal", get(reveal))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn list_domains(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let domains: Vec<_> = state
        .domains
        .iter()
        .map(|(d, rt)| {
            json!({
                "name": d.name(),
                "programs": rt.bundle.lexicon.n(),
                "utterances": rt.bundle.lexicon.m(),
                "stimuli": rt.bundle.stimuli.len(),
            })
        })
        .collect();
    Json(json!({ "domains": domains }))
}

#[derive(Deserialize)]
struct CreateRequest {
    domain: String,
    /// Stimulus pools are kept per client.
    #[serde(default)]
    client: Option<String>,
    /// Fixed target program id, for scripted runs.
    #[serde(default)]
    target: Option<String>,
}

async fn create_session(State(state): State<Arc<AppState>>, raw: Bytes) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let req: CreateRequest = body(&raw)?;
    let domain: Domain = req
        .domain
        .parse()
        .map_err(|e: Error| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown domain", e.to_string()))?;
    let rt = state.domain(domain).ok_or_else(|| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown domain", format!("{domain} is not loaded"))
    })?;
    let bundle = &rt.bundle;
    let k = state.counter.fetch_add(1, Ordering::Relaxed);
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(state.seed, k));
    let target = match &req.target {
        Some(id) => bundle
            .lexicon
            .hypothesis_index(id)
            .ok_or_else(|| ApiError::malformed(format!("unknown program `{id}`")))?,
        None => {
            let client = req.client.clone().unwrap_or_default();
            let mut pools = state.pools.lock().expect("pool lock");
            let pool = pools.entry((client, domain)).or_default();
            if pool.is_empty() {
                pool.extend(&bundle.stimuli);
                pool.shuffle(&mut rng);
            }
            pool.pop().expect("stimulus list is never empty")
        }
    };
    let id = format!("{:016x}", child_seed(state.seed ^ 0x5e55_1011, k));
    let session = Session::new(id.clone(), target, bundle.lexicon.n(), rng.gen_bool(0.5));
    state
        .sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), (domain, Arc::new(Mutex::new(session))));
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "session_id": id,
            "domain": domain.name(),
            "target_id": bundle.programs.id(target),
            "target_rendered": bundle.programs.render(target),
            "robot_labels": ROBOT_LABELS,
        })),
    ))
}

async fn get_session(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionView>> {
    let (domain, session) = state.session(&id)?;
    let bundle = &state.domain(domain).expect("sessions only for loaded domains").bundle;
    let view = session.lock().expect("session lock").view(bundle);
    Ok(Json(view))
}

#[derive(Deserialize)]
struct ExampleRequest {
    robot: String,
    utterance: String,
}

async fn submit_example(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    raw: Bytes,
) -> ApiResult<Json<GuessPayload>> {
    let (domain, session) = state.session(&id)?;
    let req: ExampleRequest = body(&raw)?;
    let rt = state.domain(domain).expect("sessions only for loaded domains");
    let mut s = session.lock().expect("session lock");
    let payload = s.submit(&rt.bundle, &rt.literal, &req.robot, &req.utterance, now_ms())?;
    if payload.solved {
        state.log_finished(&s, &rt.bundle, payload.robot);
    }
    Ok(Json(payload))
}

#[derive(Deserialize)]
struct GiveUpRequest {
    robot: String,
}

async fn give_up(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    raw: Bytes,
) -> ApiResult<Json<serde_json::Value>> {
    let (domain, session) = state.session(&id)?;
    let req: GiveUpRequest = body(&raw)?;
    let rt = state.domain(domain).expect("sessions only for loaded domains");
    let mut s = session.lock().expect("session lock");
    let status = s.give_up(&req.robot)?;
    state.log_finished(&s, &rt.bundle, &req.robot);
    let robot = s.robot(&req.robot).expect("robot exists");
    Ok(Json(json!({"robot": robot.label, "status": status, "turn": robot.history.len()})))
}

async fn reveal(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<serde_json::Value>> {
    let (_, session) = state.session(&id)?;
    let pairs = session.lock().expect("session lock").reveal()?;
    let robots: serde_json::Map<String, serde_json::Value> =
        pairs.into_iter().map(|(label, name)| (label.to_string(), json!(name))).collect();
    Ok(Json(json!({"session_id": id, "robots": robots})))
}
