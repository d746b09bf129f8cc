//! Read-only HTTP API over a model bundle and a ratings snapshot.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::pipeline::{ModelBundle, Snapshot};
use crate::retrieval::{search, QueryRequest, SearchHitView};

/// Shared state: an immutable bundle and an atomically swappable snapshot.
pub struct AppState {
    bundle: Arc<ModelBundle>,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl AppState {
    pub fn new(bundle: ModelBundle, snapshot: Snapshot) -> Arc<Self> {
        Arc::new(AppState { bundle: Arc::new(bundle), snapshot: RwLock::new(Arc::new(snapshot)) })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    /// Replaces the snapshot; requests already running keep the old one.
    pub fn swap(&self, next: Snapshot) -> Arc<Snapshot> {
        let mut guard = self.snapshot.write().expect("snapshot lock poisoned");
        std::mem::replace(&mut *guard, Arc::new(next))
    }

    pub fn bundle(&self) -> &ModelBundle {
        &self.bundle
    }
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Validation(_) | Error::InvalidParameter(_) | Error::Json(_) | Error::Parse { .. } => {
                StatusCode::BAD_REQUEST
            }
            Error::Undefined(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({"code": self.0.code(), "message": self.0.to_string()}))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/roles", get(roles))
        .route("/rankings/{role}", get(rankings))
        .route("/players/{id}", get(player))
        .route("/search", post(search_handler))
        .route("/stats", get(stats))
        .fallback(|| async { ApiError(Error::NotFound("no such endpoint".into())) })
        .with_state(state)
}

async fn roles(State(st): State<Arc<AppState>>) -> ApiResult<Value> {
    let snap = st.snapshot();
    let m = &st.bundle.roles;
    let sizes: Vec<usize> = snap.rankings.iter().map(|r| r.entries.len()).collect();
    Ok(Json(json!({
        "k": m.k,
        "silhouette": m.silhouette,
        "deltaS": st.bundle.delta_s,
        "centroids": m.centroids,
        "sweep": m.sweep,
        "rankingSizes": sizes,
        "grid": {"rows": snap.settings.grid.rows, "cols": snap.settings.grid.cols},
        "xPct": snap.settings.x_pct,
        "minMatches": snap.settings.min_matches,
        "catalogHash": st.bundle.catalog.hash(),
    })))
}

#[derive(Deserialize)]
struct Limit {
    limit: Option<usize>,
}

async fn rankings(
    State(st): State<Arc<AppState>>,
    Path(role): Path<String>,
    Query(q): Query<Limit>,
) -> ApiResult<Value> {
    let snap = st.snapshot();
    let ranking = role
        .parse::<usize>()
        .ok()
        .and_then(|r| snap.ranking(r))
        .ok_or_else(|| Error::NotFound(format!("role {role}")))?;
    let limit = q.limit.unwrap_or(usize::MAX);
    let entries: Vec<Value> = ranking
        .entries
        .iter()
        .take(limit)
        .enumerate()
        .map(|(i, e)| {
            json!({
                "rank": i + 1,
                "playerId": e.player_id,
                "name": snap.names.get(&e.player_id).cloned().unwrap_or_default(),
                "rBar": e.r_bar,
            })
        })
        .collect();
    Ok(Json(json!({
        "role": ranking.role,
        "xPct": ranking.x_pct,
        "minMatches": ranking.min_matches,
        "total": ranking.entries.len(),
        "entries": entries,
    })))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SeriesRow {
    match_id: u64,
    r: f64,
    r_star: f64,
    r_bar: f64,
    r_bar_star: f64,
    role: Option<usize>,
    hybrids: Vec<usize>,
}

async fn player(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Value> {
    let snap = st.snapshot();
    let series = id
        .parse::<u64>()
        .ok()
        .and_then(|p| snap.series.get(&p))
        .ok_or_else(|| Error::NotFound(format!("player {id}")))?;
    let p = series.player_id;
    let rows: Vec<SeriesRow> = series
        .entries
        .iter()
        .map(|e| SeriesRow {
            match_id: e.rating.match_id,
            r: e.rating.r,
            r_star: e.rating.r_star,
            r_bar: e.r_bar,
            r_bar_star: e.r_bar_star,
            role: e.rating.role.as_ref().map(|a| a.primary),
            hybrids: e.rating.role.as_ref().map(|a| a.hybrids.iter().copied().collect()).unwrap_or_default(),
        })
        .collect();
    let versatility = snap.versatility.get(&p).map(|v| json!({"v": v.v, "frequencies": v.frequencies}));
    let heatmap = snap.zones.get(&p).map(|z| z.v.clone());
    Ok(Json(json!({
        "playerId": p,
        "name": snap.names.get(&p).cloned().unwrap_or_default(),
        "matches": series.matches(),
        "eligible": series.matches() >= snap.settings.min_matches,
        "rBar": series.r_bar(),
        "rBarStar": series.r_bar_star(),
        "roles": snap.player_roles.get(&p).cloned().unwrap_or_default(),
        "versatility": versatility,
        "heatmap": heatmap,
        "grid": {"rows": snap.settings.grid.rows, "cols": snap.settings.grid.cols},
        "series": rows,
    })))
}

async fn search_handler(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<Vec<SearchHitView>> {
    let req: QueryRequest = serde_json::from_slice(&body).map_err(|e| Error::Validation(format!("query: {e}")))?;
    let snap = st.snapshot();
    let query = req.to_query(snap.settings.grid)?;
    let result = search(&query, &snap.zones, &snap.eligible_ratings(), req.top_k)?;
    let hits = result
        .hits
        .into_iter()
        .map(|h| SearchHitView {
            player_id: h.player_id,
            name: snap.names.get(&h.player_id).cloned().unwrap_or_default(),
            z: h.z,
            s: h.s,
            r_bar: h.r_bar,
            heatmap: snap.zones[&h.player_id].v.clone(),
        })
        .collect();
    Ok(Json(hits))
}

async fn stats(State(st): State<Arc<AppState>>) -> ApiResult<Value> {
    let snap = st.snapshot();
    let s = snap.stats()?;
    let (lo, hi) = s.band();
    let excellent: BTreeMap<u64, usize> =
        s.per_player.iter().filter(|(_, p)| p.excellent > 0).map(|(id, p)| (*id, p.excellent)).collect();
    Ok(Json(json!({
        "mu": s.mu,
        "sigma": s.sigma,
        "ratings": s.ratings,
        "excellenceThreshold": s.excellence_threshold,
        "band": [lo, hi],
        "withinBand": s.within_band,
        "excellentCount": s.excellent_count,
        "excellentByPlayer": excellent,
        "players": s.per_player.len(),
        "meanStdCorrelation": s.mean_std_correlation,
    })))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(format!("bind {addr}"), e))?;
    log::info!("listening on http://{}", listener.local_addr().map_err(|e| Error::io("listener", e))?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io("server", e))
}
