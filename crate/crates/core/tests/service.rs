mod common;

use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use playerank::pipeline::{
    build_snapshot, ranking_table, ratings_table, run_learning_phase, ModelBundle, OnlineSettings, PipelineConfig,
    Snapshot,
};
use playerank::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture() -> &'static (ModelBundle, Snapshot) {
    static CELL: OnceLock<(ModelBundle, Snapshot)> = OnceLock::new();
    CELL.get_or_init(|| {
        let (_, store) = common::synth_store(60, 21);
        let cfg = PipelineConfig {
            k_max: 10,
            restarts: 3,
            min_matches: 3,
            cost_grid: vec![0.1, 1.0],
            ..Default::default()
        };
        let bundle = run_learning_phase(&store, &cfg).unwrap().bundle;
        let snap = build_snapshot(&store, &bundle, OnlineSettings::from_config(&cfg, &bundle)).unwrap();
        (bundle, snap)
    })
}

fn state() -> Arc<AppState> {
    let (b, s) = fixture();
    AppState::new(b.clone(), s.clone())
}

async fn call(st: &Arc<AppState>, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn assert_error(v: &Value, code: &str) {
    assert_eq!(v["code"], code, "{v}");
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[tokio::test]
async fn roles_summary() {
    let st = state();
    let (bundle, snap) = fixture();
    let (status, v) = call(&st, "GET", "/roles", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["k"], bundle.roles.k);
    assert_eq!(v["centroids"].as_array().unwrap().len(), bundle.roles.k);
    assert_eq!(v["grid"], json!({"rows": 10, "cols": 10}));
    assert_eq!(v["catalogHash"], bundle.catalog.hash());
    let sizes: Vec<usize> = snap.rankings.iter().map(|r| r.entries.len()).collect();
    assert_eq!(v["rankingSizes"], json!(sizes));
}

#[tokio::test]
async fn ranking_matches_export() {
    let st = state();
    let (_, snap) = fixture();
    assert!(snap.k > 3);
    let (status, v) = call(&st, "GET", "/rankings/3", None).await;
    assert_eq!(status, StatusCode::OK);
    let export = ranking_table(snap.ranking(3).unwrap(), &snap.names);
    let rows: Vec<Vec<&str>> = export.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    let entries = v["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert_eq!(entries.len(), rows.len());
    for (e, row) in entries.iter().zip(&rows) {
        assert_eq!(e["rank"].to_string(), row[0]);
        assert_eq!(e["playerId"].to_string(), row[1]);
        assert_eq!(e["name"], row[2]);
        assert_eq!(format!("{:.6}", e["rBar"].as_f64().unwrap()), row[3]);
    }
    let (_, limited) = call(&st, "GET", "/rankings/3?limit=2", None).await;
    assert_eq!(limited["entries"].as_array().unwrap().len(), 2.min(rows.len()));
    assert_eq!(limited["total"], rows.len());
}

#[tokio::test]
async fn all_zone_search_scores_one() {
    let st = state();
    let (_, snap) = fixture();
    let body = json!({"zones": (0..100).collect::<Vec<_>>(), "top_k": 10_000}).to_string();
    let (status, v) = call(&st, "POST", "/search", Some(&body)).await;
    assert_eq!(status, StatusCode::OK);
    let hits = v.as_array().unwrap();
    let eligible = snap.eligible_ratings();
    let expected = eligible.keys().filter(|p| snap.zones.contains_key(p)).count();
    assert!(expected > 0);
    assert_eq!(hits.len(), expected);
    for h in hits {
        assert!((h["s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let (z, s, r) = (h["z"].as_f64().unwrap(), h["s"].as_f64().unwrap(), h["rBar"].as_f64().unwrap());
        assert!((z - s * r).abs() < 1e-12);
        assert_eq!(h["heatmap"].as_array().unwrap().len(), 100);
    }
    let zs: Vec<f64> = hits.iter().map(|h| h["z"].as_f64().unwrap()).collect();
    assert!(zs.windows(2).all(|w| w[0] >= w[1]));
}

#[tokio::test]
async fn weighted_and_limited_search() {
    let st = state();
    let mut weights = vec![0.0; 100];
    weights[55] = 2.0;
    weights[56] = 0.5;
    let body = json!({"weights": weights, "top_k": 3}).to_string();
    let (status, v) = call(&st, "POST", "/search", Some(&body)).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v.as_array().unwrap().len() <= 3);
}

#[tokio::test]
async fn player_profile_is_consistent_with_exports() {
    let st = state();
    let (_, snap) = fixture();
    let export = ratings_table(snap);
    let (&id, series) = snap.series.iter().find(|(_, s)| s.matches() >= 3).unwrap();
    let (status, v) = call(&st, "GET", &format!("/players/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let heat: f64 = v["heatmap"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((heat - 1.0).abs() < 1e-12);
    let last = export.lines().rfind(|l| l.split('\t').next() == Some(&id.to_string())).unwrap();
    let r_bar_col = last.split('\t').nth(6).unwrap();
    assert_eq!(format!("{:.6}", v["rBar"].as_f64().unwrap()), r_bar_col);
    assert_eq!(v["matches"], series.matches());
    assert_eq!(v["series"].as_array().unwrap().len(), series.matches());
    assert_eq!(v["eligible"], true);
    let vers = v["versatility"]["v"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&vers));
}

#[tokio::test]
async fn stats_match_snapshot() {
    let st = state();
    let (_, snap) = fixture();
    let (status, v) = call(&st, "GET", "/stats", None).await;
    assert_eq!(status, StatusCode::OK);
    let s = snap.stats().unwrap();
    assert_eq!(v["mu"].as_f64().unwrap(), s.mu);
    assert_eq!(v["ratings"], s.ratings);
}

#[tokio::test]
async fn missing_resources_are_404() {
    let st = state();
    for uri in ["/players/987654321", "/players/abc", "/rankings/99", "/rankings/x", "/nowhere"] {
        let (status, v) = call(&st, "GET", uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_error(&v, "not_found");
    }
}

#[tokio::test]
async fn bad_queries_are_400() {
    let st = state();
    let bodies = [
        "{not json",
        r#"{"zones": []}"#,
        r#"{"zones": [100]}"#,
        r#"{"zones": [1], "weights": [1.0]}"#,
        r#"{"weights": [1.0, 2.0]}"#,
        r#"{"zones": [1], "colour": "red"}"#,
        r#"{"zones": [1], "grid": {"rows": 5, "cols": 5}}"#,
        r#"{"zones": [1], "grid": {"rows": 0, "cols": 5}}"#,
    ];
    for b in bodies {
        let (status, v) = call(&st, "POST", "/search", Some(b)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{b}: {v}");
        assert!(v["code"].is_string() && v["message"].is_string());
    }
}

#[tokio::test]
async fn snapshot_swap_is_visible() {
    let st = state();
    let (bundle, snap) = fixture();
    let (&id, _) = snap.series.iter().next().unwrap();
    assert_eq!(call(&st, "GET", &format!("/players/{id}"), None).await.0, StatusCode::OK);
    let old = st.swap(Snapshot::empty(snap.settings.clone(), bundle));
    assert_eq!(old.series.len(), snap.series.len());
    let (status, _) = call(&st, "GET", &format!("/players/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (_, r) = call(&st, "GET", "/rankings/0", None).await;
    assert_eq!(r["total"], 0);
    let (status, v) = call(&st, "GET", "/stats", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&v, "undefined_metric");
}
