//! Local HTTP API over one loaded run.
//!
//! Reads share immutable state. `POST /api/apply` takes the single writer
//! lock, re-validates the node and swaps in a new applied version.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use anonybench_core::attacks::linkage_attack;
use anonybench_core::lattice::parse_node_id;
use anonybench_core::Candidate;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;

use crate::engine::{build_report, to_json, LatticeEntry, Run, Session};
use crate::io::dataset_csv;

/// Rows shown by the node preview.
pub const PREVIEW_ROWS: usize = 10;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// A materialized node with its export and linkage summary.
#[derive(Debug, Clone)]
pub struct Applied {
    pub version: u64,
    pub candidate: Candidate,
    pub csv: String,
    pub report: String,
    pub risk: serde_json::Value,
}

pub struct AppState {
    pub session: Session,
    pub run: Run,
    heights: Vec<usize>,
    current: RwLock<Option<Arc<Applied>>>,
    writer: Mutex<()>,
}

impl AppState {
    /// Starts with the engine optimum applied, if there is one.
    pub fn new(session: Session, run: Run) -> anyhow::Result<Arc<AppState>> {
        let heights = session.heights()?;
        let first = match run.optimum() {
            Some(c) => Some(Arc::new(materialize(&session, &run, c.clone(), 1)?)),
            None => None,
        };
        Ok(Arc::new(AppState {
            session,
            run,
            heights,
            current: RwLock::new(first),
            writer: Mutex::new(()),
        }))
    }

    pub fn current(&self) -> Option<Arc<Applied>> {
        self.current.read().expect("state lock").clone()
    }
}

fn materialize(session: &Session, run: &Run, candidate: Candidate, version: u64) -> anyhow::Result<Applied> {
    let release = session.release(&candidate)?;
    let csv = dataset_csv(&release)?;
    let report = to_json(&build_report(session, run, Some(&candidate)));
    // every input record is assumed known to the adversary
    let linkage = linkage_attack(&release, &session.data, &session.hierarchies, &candidate.levels)?;
    let risk = json!({
        "version": version,
        "node": candidate.id(),
        "released_records": release.len(),
        "suppressed_count": candidate.suppressed_indices.len(),
        "min_class_size": candidate.min_class_size,
        "linkage": linkage.metrics,
    });
    Ok(Applied {
        version,
        candidate,
        csv,
        report,
        risk,
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/lattice", get(lattice))
        .route("/api/node/{levels}", get(node))
        .route("/api/risk", get(risk))
        .route("/api/apply", post(apply))
        .route("/api/export", get(export))
        .route("/api/report", get(report))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no such endpoint") })
        .with_state(state)
}

#[derive(Debug, Serialize)]
struct LatticeView {
    optimum: Option<String>,
    heights: Vec<usize>,
    nodes: Vec<LatticeEntry>,
}

async fn lattice(State(s): State<Arc<AppState>>) -> Json<LatticeView> {
    Json(LatticeView {
        optimum: s.run.optimum_id(),
        heights: s.heights.clone(),
        nodes: s.run.entries(),
    })
}

/// 400 for text that is not a level vector, 404 for one outside the lattice.
fn resolve_levels(s: &AppState, text: &str) -> ApiResult<Vec<usize>> {
    let levels = parse_node_id(text)
        .filter(|l| !l.is_empty())
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed node id `{text}`")))?;
    check_levels(s, levels)
}

fn check_levels(s: &AppState, levels: Vec<usize>) -> ApiResult<Vec<usize>> {
    let inside = levels.len() == s.heights.len() && levels.iter().zip(&s.heights).all(|(l, h)| l <= h);
    if !inside {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("node {} is not in the lattice {:?}", anonybench_core::lattice::node_id(&levels), s.heights),
        ));
    }
    Ok(levels)
}

async fn evaluate(s: &Arc<AppState>, levels: Vec<usize>) -> ApiResult<Candidate> {
    let s = Arc::clone(s);
    tokio::task::spawn_blocking(move || s.session.evaluate(&levels))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Debug, Serialize)]
struct Preview {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
struct NodeView {
    id: String,
    optimal: bool,
    candidate: Candidate,
    preview: Preview,
}

async fn node(State(s): State<Arc<AppState>>, Path(text): Path<String>) -> ApiResult<Json<NodeView>> {
    let levels = resolve_levels(&s, &text)?;
    let candidate = evaluate(&s, levels).await?;
    let release = s.session.release(&candidate)?;
    let preview = Preview {
        header: release.schema().iter().map(|a| a.name.clone()).collect(),
        rows: release
            .records()
            .iter()
            .take(PREVIEW_ROWS)
            .map(|r| r.iter().map(|v| v.label().into_owned()).collect())
            .collect(),
    };
    Ok(Json(NodeView {
        id: candidate.id(),
        optimal: Some(candidate.id()) == s.run.optimum_id(),
        candidate,
        preview,
    }))
}

fn applied(s: &AppState) -> ApiResult<Arc<Applied>> {
    s.current()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no node applied: the constraints are unsatisfiable"))
}

async fn risk(State(s): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    Ok(Json(applied(&s)?.risk.clone()))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LevelsSpec {
    Id(String),
    Vector(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApplyRequest {
    levels: LevelsSpec,
}

async fn apply(
    State(s): State<Arc<AppState>>,
    body: Result<Json<ApplyRequest>, JsonRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Json(req) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))?;
    let levels = match req.levels {
        LevelsSpec::Id(text) => resolve_levels(&s, &text)?,
        LevelsSpec::Vector(v) => check_levels(&s, v)?,
    };
    let _writer = s.writer.lock().await;
    let candidate = evaluate(&s, levels).await?;
    if !candidate.feasible {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!(
                "node {} does not satisfy the constraints{}",
                candidate.id(),
                candidate.reason.as_deref().map(|r| format!(": {r}")).unwrap_or_default()
            ),
        ));
    }
    let version = s.current().map(|a| a.version).unwrap_or(0) + 1;
    let state = Arc::clone(&s);
    let next = tokio::task::spawn_blocking(move || materialize(&state.session, &state.run, candidate, version))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let next = Arc::new(next);
    *s.current.write().expect("state lock") = Some(Arc::clone(&next));
    let mut body: BTreeMap<&str, serde_json::Value> = BTreeMap::new();
    body.insert("version", json!(next.version));
    body.insert("node", json!(next.candidate.id()));
    body.insert("suppressed_count", json!(next.candidate.suppressed_indices.len()));
    body.insert("utility", json!(next.candidate.utility));
    Ok(Json(json!(body)))
}

async fn export(State(s): State<Arc<AppState>>) -> ApiResult<Response> {
    let a = applied(&s)?;
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
            (header::HeaderName::from_static("x-anonybench-version"), a.version.to_string()),
        ],
        a.csv.clone(),
    )
        .into_response())
}

async fn report(State(s): State<Arc<AppState>>) -> ApiResult<Response> {
    let a = applied(&s)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], a.report.clone()).into_response())
}

/// Serves until Ctrl-C. Binding fails if the port is taken.
pub async fn serve(state: Arc<AppState>, port: u16) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .map_err(|e| anyhow::anyhow!("cannot listen on 127.0.0.1:{port}: {e}"))?;
    println!("serving on http://127.0.0.1:{port}/api/lattice");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
