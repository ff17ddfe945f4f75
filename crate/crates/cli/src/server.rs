// SPDX-License-Identifier: Apache-2.0
//! JSON session service for interactive knowledge entry.
//!
//! A session holds a base essential graph, the accepted pieces and the
//! current graph, which is always `add_bg_knowledge(base, accepted)`. Each
//! session sits behind its own mutex, so requests to one session are
//! serialized while distinct sessions proceed in parallel.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use magmec::algorithms::{add_bg_knowledge, verify_completeness, AddBgError};
use magmec::knowledge::{check_admissible, parse_piece, Form};
use magmec::oracle::{represented_class, restrict_mec, OracleError};
use magmec::{parse_pmg, render_pmg, Mark, Piece, Pmg};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub error: &'static str,
    pub detail: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status,
            error,
            detail: detail.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no session `{id}`"))
    }

    fn parse(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "parse", detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.error, "detail": self.detail }))).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub struct Session {
    pub id: String,
    pub base: Pmg,
    pub accepted: Vec<Piece>,
    pub current: Pmg,
    /// Accepted piece with the graph before it.
    pub undo: Vec<(Piece, Pmg)>,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

impl Session {
    fn state(&self) -> Value {
        json!({
            "id": self.id,
            "base": render_pmg(&self.base),
            "graph": render_pmg(&self.current),
            "knowledge": self.accepted.iter().map(|p| p.display(&self.base)).collect::<Vec<_>>(),
            "undoDepth": self.undo.len(),
            "createdAt": self.created,
            "admissible": admissible(&self.current),
        })
    }

    /// The graph after adding `piece`, with its trace, without mutating.
    fn try_piece(&self, piece: Piece) -> Result<(Pmg, Value), ApiError> {
        match add_bg_knowledge(&self.current, &[piece]) {
            Ok(out) => {
                let trace: Vec<Value> = out.trace.iter().map(|t| t.to_json(&out.graph)).collect();
                Ok((out.graph, Value::Array(trace)))
            }
            Err(AddBgError::Inadmissible { reason, .. }) => Err(ApiError::new(
                StatusCode::CONFLICT,
                "inadmissible",
                reason.to_string(),
            )),
            Err(e @ AddBgError::Conflict { .. }) => {
                Err(ApiError::new(StatusCode::CONFLICT, "conflict", e.to_string()))
            }
        }
    }
}

/// For every edge with a circle, which of the four piece forms are
/// currently admissible, with the reason for those that are not.
pub fn admissible(g: &Pmg) -> Value {
    let mut out = Vec::new();
    for (x, y, mx, my) in g.edges() {
        if mx != Mark::Circle && my != Mark::Circle {
            continue;
        }
        let forms: Vec<Value> = Form::ALL
            .iter()
            .map(|&form| {
                let p = Piece::new(x, y, form);
                match check_admissible(g, p) {
                    Ok(()) => json!({ "piece": p.display(g), "admissible": true }),
                    Err(why) => json!({ "piece": p.display(g), "admissible": false, "reason": why.to_string() }),
                }
            })
            .collect();
        out.push(json!({
            "x": g.name(x),
            "y": g.name(y),
            "edge": magmec::pmg::render_edge(g, x, y),
            "forms": forms,
        }));
    }
    Value::Array(out)
}

struct Inner {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    cap: usize,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(cap: usize) -> Self {
        AppState {
            inner: Arc::new(Inner {
                sessions: RwLock::new(HashMap::new()),
                cap,
            }),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.inner
            .sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn insert(&self, s: Session) {
        let id = s.id.clone();
        self.inner
            .sessions
            .write()
            .expect("session map lock")
            .insert(id, Arc::new(Mutex::new(s)));
    }

    /// Opens a session on `base` and replays `pieces`.
    pub fn open(&self, id: String, base: Pmg, pieces: &[Piece], created: u64) -> Result<Value, ApiError> {
        let mut s = Session {
            id,
            current: base.clone(),
            base,
            accepted: Vec::new(),
            undo: Vec::new(),
            created,
        };
        for &p in pieces {
            let (next, _) = s.try_piece(p)?;
            s.undo.push((p, std::mem::replace(&mut s.current, next)));
            s.accepted.push(p);
        }
        let state = s.state();
        self.insert(s);
        Ok(state)
    }

    pub fn snapshot(&self) -> Vec<SnapshotEntry> {
        let map = self.inner.sessions.read().expect("session map lock");
        let mut out: Vec<SnapshotEntry> = map
            .values()
            .map(|s| {
                let s = s.lock().expect("session lock");
                SnapshotEntry {
                    id: s.id.clone(),
                    base: render_pmg(&s.base),
                    knowledge: s.accepted.iter().map(|p| p.display(&s.base)).collect(),
                    created_at: s.created,
                }
            })
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn restore(&self, entries: &[SnapshotEntry]) -> Result<(), ApiError> {
        for e in entries {
            let base = parse_pmg(&e.base).map_err(|err| ApiError::parse(err.to_string()))?;
            let pieces = e
                .knowledge
                .iter()
                .map(|t| parse_piece(&base, t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|err| ApiError::parse(err.to_string()))?;
            self.open(e.id.clone(), base, &pieces, e.created_at)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotEntry {
    pub id: String,
    pub base: String,
    pub knowledge: Vec<String>,
    pub created_at: u64,
}

pub fn save_snapshot(state: &AppState, path: &Path) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&state.snapshot()).expect("snapshot serializes");
    std::fs::write(path, text)
}

pub fn load_snapshot(state: &AppState, path: &Path) -> anyhow::Result<()> {
    let entries: Vec<SnapshotEntry> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    state
        .restore(&entries)
        .map_err(|e| anyhow::anyhow!("{}: {}", e.error, e.detail))
}

fn body<T: for<'de> Deserialize<'de>>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::parse(format!("request body: {e}")))
}

#[derive(Deserialize)]
struct NewSession {
    graph: String,
}

#[derive(Deserialize)]
struct PieceBody {
    piece: String,
}

#[derive(Deserialize)]
struct MecQuery {
    #[serde(default)]
    restrict: bool,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

async fn create(State(st): State<AppState>, bytes: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req: NewSession = body(&bytes)?;
    let base = parse_pmg(&req.graph).map_err(|e| ApiError::parse(e.to_string()))?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let state = st.open(id, base, &[], now())?;
    Ok((StatusCode::CREATED, Json(state)))
}

async fn get_state(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = st.session(&id)?;
    let s = s.lock().expect("session lock");
    Ok(Json(s.state()))
}

async fn get_admissible(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = st.session(&id)?;
    let s = s.lock().expect("session lock");
    Ok(Json(json!({ "admissible": admissible(&s.current) })))
}

fn piece_of(s: &Session, bytes: &Bytes) -> Result<Piece, ApiError> {
    let req: PieceBody = body(bytes)?;
    parse_piece(&s.current, &req.piece).map_err(|e| ApiError::parse(e.to_string()))
}

async fn knowledge(State(st): State<AppState>, UrlPath(id): UrlPath<String>, bytes: Bytes) -> ApiResult {
    let s = st.session(&id)?;
    let mut s = s.lock().expect("session lock");
    let piece = piece_of(&s, &bytes)?;
    let (next, trace) = s.try_piece(piece)?;
    let prev = std::mem::replace(&mut s.current, next);
    s.undo.push((piece, prev));
    s.accepted.push(piece);
    Ok(Json(json!({
        "graph": render_pmg(&s.current),
        "trace": trace,
        "admissible": admissible(&s.current),
    })))
}

async fn whatif(State(st): State<AppState>, UrlPath(id): UrlPath<String>, bytes: Bytes) -> ApiResult {
    let s = st.session(&id)?;
    let s = s.lock().expect("session lock");
    let piece = piece_of(&s, &bytes)?;
    let (next, trace) = s.try_piece(piece)?;
    Ok(Json(json!({
        "graph": render_pmg(&next),
        "trace": trace,
        "admissible": admissible(&next),
    })))
}

async fn undo(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = st.session(&id)?;
    let mut s = s.lock().expect("session lock");
    let Some((_, prev)) = s.undo.pop() else {
        return Err(ApiError::new(StatusCode::CONFLICT, "nothing-to-undo", "no accepted knowledge"));
    };
    s.current = prev;
    s.accepted.pop();
    Ok(Json(s.state()))
}

async fn mec_size(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<MecQuery>,
) -> ApiResult {
    let s = st.session(&id)?;
    let (base, accepted) = {
        let s = s.lock().expect("session lock");
        (s.base.clone(), s.accepted.clone())
    };
    let class = represented_class(&base, st.inner.cap).map_err(|e| match e {
        OracleError::CapExceeded { .. } => {
            ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "too-large", e.to_string())
        }
        _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "oracle", e.to_string()),
    })?;
    let size = if q.restrict && !accepted.is_empty() {
        match restrict_mec(&class, &accepted) {
            Ok(c) => c.len(),
            Err(OracleError::InconsistentKnowledge) => 0,
            Err(e) => return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "oracle", e.to_string())),
        }
    } else {
        class.len()
    };
    Ok(Json(json!({ "size": size, "restricted": q.restrict })))
}

async fn verify(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let s = st.session(&id)?;
    let s = s.lock().expect("session lock");
    let rep = verify_completeness(&s.base, &s.accepted, &s.current);
    Ok(Json(json!({ "verdict": rep.verdict, "report": rep })))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/admissible", get(get_admissible))
        .route("/sessions/{id}/knowledge", post(knowledge))
        .route("/sessions/{id}/whatif", post(whatif))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/mec", get(mec_size))
        .route("/sessions/{id}/verify", post(verify))
        .with_state(state)
}

/// Serves until Ctrl-C, then writes the snapshot if one is configured.
pub async fn serve(addr: String, cap: usize, snapshot: Option<PathBuf>) -> anyhow::Result<()> {
    let state = AppState::new(cap);
    if let Some(path) = snapshot.as_deref().filter(|p| p.exists()) {
        load_snapshot(&state, path)?;
    }
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(path) = snapshot {
        save_snapshot(&state, &path)?;
        eprintln!("saved sessions to {}", path.display());
    }
    Ok(())
}
