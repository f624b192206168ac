//! HTTP session service behind the interactive tiler.
//!
//! Each session holds one patch over a hexagonal region and an undo stack of
//! placements. The session body (`GET /sessions/{id}`) is exactly the patch
//! document, so a place/undo round trip returns byte-identical text; the
//! revision counter and timestamps travel in response headers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use monotile::dendrite::order_hint;
use monotile::hexgrid::{AxialCell, Region};
use monotile::render::{render_svg, RenderStyle, StyleKind};
use monotile::solver::{check_placement, legal_states, Patch, PatchDoc, PatchError, Violation};
use monotile::tilemodel::{Chirality, RuleSet, TileState};

pub const REVISION_HEADER: &str = "x-session-revision";
pub const CREATED_HEADER: &str = "x-session-created";
pub const MODIFIED_HEADER: &str = "x-session-modified";

pub const DEFAULT_RADIUS: u32 = 3;
/// Largest region a session may request.
pub const MAX_RADIUS: u32 = 12;

struct Session {
    patch: Patch,
    undo: Vec<AxialCell>,
    revision: u64,
    created: u64,
    modified: u64,
}

pub struct AppState {
    ruleset: Arc<RuleSet>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    dir: Option<PathBuf>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl AppState {
    /// Creates the service state, loading any sessions saved in `dir`.
    pub fn new(ruleset: RuleSet, dir: Option<PathBuf>) -> std::io::Result<Arc<AppState>> {
        let ruleset = Arc::new(ruleset);
        let mut sessions = BTreeMap::new();
        if let Some(dir) = &dir {
            fs::create_dir_all(dir)?;
            for entry in fs::read_dir(dir)? {
                let path = entry?.path();
                let Some(id) = session_file_id(&path) else {
                    continue;
                };
                let text = fs::read_to_string(&path)?;
                let patch = PatchDoc::parse(&text)
                    .ok()
                    .and_then(|d| d.to_patch(ruleset.clone()).ok());
                if let Some(patch) = patch {
                    let t = now();
                    let s = Session {
                        patch,
                        undo: Vec::new(),
                        revision: 0,
                        created: t,
                        modified: t,
                    };
                    sessions.insert(id, Arc::new(Mutex::new(s)));
                }
            }
        }
        Ok(Arc::new(AppState {
            ruleset,
            sessions: RwLock::new(sessions),
            dir,
        }))
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    fn save(&self, id: &str, s: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let tmp = dir.join(format!(".{id}.json.tmp"));
        let path = dir.join(format!("{id}.json"));
        fs::write(&tmp, s.patch.to_json())
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| ApiError::Internal(format!("saving session: {e}")))
    }
}

fn session_file_id(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let id = name.strip_suffix(".json")?;
    (!id.starts_with('.') && !id.is_empty()).then(|| id.to_string())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(read))
        .route("/sessions/{id}/legal", get(legal))
        .route("/sessions/{id}/place", post(place))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/hint", get(hint))
        .route("/sessions/{id}/render.svg", get(render))
        .with_state(state)
}

/// Runs the service until the process is stopped.
pub async fn serve(port: u16, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Debug)]
enum ApiError {
    NotFound(String),
    BadRequest(String),
    Conflict {
        violations: Vec<Violation>,
        cycle: Option<Vec<AxialCell>>,
    },
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::NotFound(id) => (
                StatusCode::NOT_FOUND,
                Json(json!({"error": "not_found", "message": format!("no session `{id}`")})),
            )
                .into_response(),
            ApiError::BadRequest(message) => (
                StatusCode::BAD_REQUEST,
                Json(json!({"error": "bad_request", "message": message})),
            )
                .into_response(),
            ApiError::Conflict { violations, cycle } => {
                let clauses: Vec<String> =
                    violations.iter().map(|v| v.clause.to_string()).collect();
                (
                    StatusCode::CONFLICT,
                    Json(json!({
                        "error": "violation",
                        "clauses": clauses,
                        "violations": violations,
                        "cycle": cycle,
                    })),
                )
                    .into_response()
            }
            ApiError::Internal(message) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                Json(json!({"error": "internal", "message": message})),
            )
                .into_response(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::BadRequest(r.body_text())
    }
}

impl From<PatchError> for ApiError {
    fn from(e: PatchError) -> Self {
        ApiError::BadRequest(e.to_string())
    }
}

fn header_value(n: u64) -> HeaderValue {
    HeaderValue::from_str(&n.to_string()).expect("digits are a valid header")
}

fn snapshot(s: &Session) -> Response {
    let mut headers = HeaderMap::new();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/json"),
    );
    headers.insert(
        HeaderName::from_static(REVISION_HEADER),
        header_value(s.revision),
    );
    headers.insert(
        HeaderName::from_static(CREATED_HEADER),
        header_value(s.created),
    );
    headers.insert(
        HeaderName::from_static(MODIFIED_HEADER),
        header_value(s.modified),
    );
    (headers, s.patch.to_json()).into_response()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    radius: Option<u32>,
}

async fn create(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateBody>>,
) -> Result<Response, ApiError> {
    let body = body.map(|b| b.0).unwrap_or_default();
    let radius = body.radius.unwrap_or(DEFAULT_RADIUS);
    if radius > MAX_RADIUS {
        return Err(ApiError::BadRequest(format!(
            "radius must be at most {MAX_RADIUS}"
        )));
    }
    let id = uuid::Uuid::new_v4().simple().to_string();
    let t = now();
    let session = Session {
        patch: Patch::new(Region::hex(radius), app.ruleset.clone()),
        undo: Vec::new(),
        revision: 0,
        created: t,
        modified: t,
    };
    app.save(&id, &session)?;
    let doc = PatchDoc::from_patch(&session.patch);
    app.sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json!({"id": id, "patch": doc}))).into_response())
}

async fn read(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let s = s.lock().expect("session lock");
    Ok(snapshot(&s))
}

#[derive(Debug, Deserialize)]
struct CellQuery {
    q: i32,
    r: i32,
}

#[derive(Debug, Serialize)]
struct StateDoc {
    variant: String,
    orientation: u8,
    chirality: Chirality,
}

async fn legal(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    query: Result<Query<CellQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let Query(cq) = query.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let c = AxialCell::new(cq.q, cq.r);
    let s = s.lock().expect("session lock");
    let states: Vec<StateDoc> = legal_states(&s.patch, c)?
        .into_iter()
        .map(|t| StateDoc {
            variant: t.variant,
            orientation: t.orientation,
            chirality: t.chirality,
        })
        .collect();
    Ok(Json(json!({"cell": c, "states": states})).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaceBody {
    q: i32,
    r: i32,
    variant: String,
    orientation: u8,
    chirality: Chirality,
}

async fn place(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<PlaceBody>, JsonRejection>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let Json(b) = body?;
    let c = AxialCell::new(b.q, b.r);
    let state = TileState::new(b.variant, b.orientation, b.chirality);
    let mut s = session.lock().expect("session lock");
    let violations = check_placement(&s.patch, c, &state)?;
    if !violations.is_empty() {
        let cycle = violations
            .iter()
            .find(|v| v.clause == monotile::solver::Clause::Acyclic)
            .map(|v| v.cells.clone());
        return Err(ApiError::Conflict { violations, cycle });
    }
    s.patch.assign(c, &state)?;
    s.undo.push(c);
    s.revision += 1;
    s.modified = now();
    app.save(&id, &s)?;
    Ok(snapshot(&s))
}

async fn undo(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let mut s = session.lock().expect("session lock");
    let Some(c) = s.undo.pop() else {
        return Err(ApiError::BadRequest("nothing to undo".into()));
    };
    s.patch.unassign(c);
    s.revision += 1;
    s.modified = now();
    app.save(&id, &s)?;
    Ok(snapshot(&s))
}

async fn hint(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let s = session.lock().expect("session lock");
    Ok(Json(json!({"endpoints": order_hint(&s.patch)})).into_response())
}

#[derive(Debug, Deserialize)]
struct RenderQuery {
    style: Option<String>,
}

async fn render(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<RenderQuery>,
) -> Result<Response, ApiError> {
    let session = app.get(&id)?;
    let kind: StyleKind = q
        .style
        .as_deref()
        .unwrap_or("outline")
        .parse()
        .map_err(|e: monotile::render::RenderError| ApiError::BadRequest(e.to_string()))?;
    let s = session.lock().expect("session lock");
    let svg = render_svg(&s.patch, &RenderStyle::new(kind))
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}
