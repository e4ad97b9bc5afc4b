use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use anonybench::api::{router, AppState, PREVIEW_ROWS};
use anonybench::demo::generate_demo;
use anonybench::{RunConfig, Session};
use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    dir: tempfile::TempDir,
    state: Arc<AppState>,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    generate_demo(dir.path(), 400, 7).unwrap();
    let config = RunConfig::load(&dir.path().join("config.json")).unwrap();
    let session = Session::load(config).unwrap();
    let run = session.search().unwrap();
    let state = AppState::new(session, run).unwrap();
    Fixture { dir, state }
}

impl Fixture {
    fn app(&self) -> Router {
        router(Arc::clone(&self.state))
    }
}

async fn send(app: Router, req: Request<Body>) -> (StatusCode, Option<String>, Vec<u8>) {
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let body = to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec();
    (status, ctype, body)
}

async fn get(app: Router, uri: &str) -> (StatusCode, Option<String>, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn get_json(app: Router, uri: &str) -> (StatusCode, Value) {
    let (status, ctype, body) = get(app, uri).await;
    assert!(ctype.unwrap_or_default().starts_with("application/json"), "{uri}");
    (status, serde_json::from_slice(&body).unwrap())
}

async fn apply(app: Router, body: Value) -> (StatusCode, Value) {
    let req = Request::post("/api/apply")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, _, body) = send(app, req).await;
    (status, serde_json::from_slice(&body).unwrap())
}

fn without_timing(report: &str) -> String {
    report.lines().filter(|l| !l.contains("\"search_ms\"")).collect::<Vec<_>>().join("\n")
}

fn cli_anonymize(dir: &Path) -> (String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_anonybench"))
        .args(["anonymize", "--config"])
        .arg(dir.join("config.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (
        fs::read_to_string(dir.join("out/release.csv")).unwrap(),
        fs::read_to_string(dir.join("out/report.json")).unwrap(),
    )
}

#[tokio::test]
async fn lattice_lists_every_node_with_one_optimum() {
    let f = fixture();
    let (status, v) = get_json(f.app(), "/api/lattice").await;
    assert_eq!(status, StatusCode::OK);
    let nodes = v["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 5832);
    for n in nodes {
        for key in ["levels", "satisfied", "utility", "status"] {
            assert!(n.get(key).is_some(), "{key} missing in {n}");
        }
    }
    let optimal: Vec<&Value> = nodes.iter().filter(|n| n["optimal"] == true).collect();
    assert_eq!(optimal.len(), 1);
    assert_eq!(optimal[0]["id"], v["optimum"]);
}

#[tokio::test]
async fn node_lookup_validates_ids() {
    let f = fixture();
    let (status, v) = get_json(f.app(), "/api/node/0.0.0.0.0.0.0.0").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["candidate"]["feasible"], false);
    assert_eq!(v["candidate"]["utility"]["utility"], 1.0);
    assert_eq!(v["preview"]["rows"].as_array().unwrap().len(), PREVIEW_ROWS);
    assert_eq!(v["preview"]["header"][0], "ethnicity");

    let (status, v) = get_json(f.app(), "/api/node/0.1.2").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
    let (status, _) = get_json(f.app(), "/api/node/9.0.0.0.0.0.0.0").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    for bad in ["abc", "1..2", "1.-1.0"] {
        let (status, v) = get_json(f.app(), &format!("/api/node/{bad}")).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert!(v["error"].as_str().unwrap().contains("malformed"));
    }
    let (status, _) = get_json(f.app(), "/api/nothing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn applying_the_optimum_matches_the_cli_byte_for_byte() {
    let f = fixture();
    let (cli_csv, cli_report) = cli_anonymize(f.dir.path());
    let optimum = f.state.run.optimum_id().unwrap();
    let (status, v) = apply(f.app(), json!({ "levels": optimum })).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 2);
    assert_eq!(v["node"], optimum.as_str());

    let (status, ctype, body) = get(f.app(), "/api/export").await;
    assert_eq!(status, StatusCode::OK);
    assert!(ctype.unwrap().starts_with("text/csv"));
    assert_eq!(String::from_utf8(body).unwrap(), cli_csv);

    let (status, _, body) = get(f.app(), "/api/report").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(without_timing(&String::from_utf8(body).unwrap()), without_timing(&cli_report));
}

#[tokio::test]
async fn infeasible_and_malformed_applies_are_rejected() {
    let f = fixture();
    let before = get(f.app(), "/api/export").await.2;
    let (status, v) = apply(f.app(), json!({ "levels": [0, 0, 0, 0, 0, 0, 0, 0] })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains("does not satisfy"));
    let (status, _) = apply(f.app(), json!({ "levels": "0.1" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = apply(f.app(), json!({ "levels": "x.y" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = apply(f.app(), json!({ "nodes": [] })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let req = Request::post("/api/apply")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let (status, _, body) = send(f.app(), req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(serde_json::from_slice::<Value>(&body).unwrap()["error"].is_string());
    // rejected applies leave the current version alone
    assert_eq!(get(f.app(), "/api/export").await.2, before);
    assert_eq!(get_json(f.app(), "/api/risk").await.1["version"], 1);
}

#[tokio::test]
async fn applying_another_node_creates_a_new_version() {
    let f = fixture();
    let optimum = f.state.run.optimum_id().unwrap();
    let other = f
        .state
        .run
        .entries()
        .into_iter()
        .find(|e| e.node.satisfied == Some(true) && e.node.id != optimum)
        .unwrap();
    let (status, v) = apply(f.app(), json!({ "levels": other.node.levels })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["version"], 2);
    let (_, report) = get_json(f.app(), "/api/report").await;
    assert_eq!(report["status"], "selected");
    assert_eq!(report["chosen_node"], other.node.id.as_str());
    assert_eq!(report["optimum"], optimum.as_str());

    let expected = f.state.session.release_csv(&f.state.session.evaluate(&other.node.levels).unwrap()).unwrap();
    assert_eq!(String::from_utf8(get(f.app(), "/api/export").await.2).unwrap(), expected);

    let (status, risk) = get_json(f.app(), "/api/risk").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(risk["version"], 2);
    assert_eq!(risk["node"], other.node.id.as_str());
    let min_class = risk["min_class_size"].as_f64().unwrap();
    assert!(min_class >= 10.0);
    assert!(risk["linkage"]["max_risk"].as_f64().unwrap() <= 1.0 / 10.0);
}

#[tokio::test]
async fn concurrent_reads_during_applies_see_whole_versions() {
    let f = fixture();
    let feasible: Vec<Vec<usize>> = f
        .state
        .run
        .entries()
        .into_iter()
        .filter(|e| e.node.satisfied == Some(true))
        .take(4)
        .map(|e| e.node.levels)
        .collect();
    let mut tasks = Vec::new();
    for levels in feasible.clone() {
        let app = f.app();
        tasks.push(tokio::spawn(async move { apply(app, json!({ "levels": levels })).await.0 }));
        let app = f.app();
        tasks.push(tokio::spawn(async move { get(app, "/api/lattice").await.0 }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let (_, risk) = get_json(f.app(), "/api/risk").await;
    assert_eq!(risk["version"], 1 + feasible.len() as u64);
    // the export belongs to the node the risk summary names
    let levels = anonybench_core::lattice::parse_node_id(risk["node"].as_str().unwrap()).unwrap();
    let expected = f.state.session.release_csv(&f.state.session.evaluate(&levels).unwrap()).unwrap();
    assert_eq!(String::from_utf8(get(f.app(), "/api/export").await.2).unwrap(), expected);
}

#[tokio::test]
async fn unsatisfiable_runs_serve_the_lattice_but_nothing_to_export() {
    let dir = tempfile::tempdir().unwrap();
    generate_demo(dir.path(), 400, 7).unwrap();
    let mut config = RunConfig::load(&dir.path().join("config.json")).unwrap();
    config.constraints = vec![anonybench_core::PrivacyConstraint::KAnonymity { k: 100_000 }];
    let session = Session::load(config).unwrap();
    let run = session.search().unwrap();
    let app = router(AppState::new(session, run).unwrap());
    let (status, v) = get_json(app.clone(), "/api/lattice").await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["optimum"].is_null());
    assert_eq!(get(app.clone(), "/api/export").await.0, StatusCode::CONFLICT);
    assert_eq!(get(app, "/api/report").await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn serving_on_a_busy_port_fails() {
    let f = fixture();
    let taken = tokio::net::TcpListener::bind(("127.0.0.1", 0)).await.unwrap();
    let port = taken.local_addr().unwrap().port();
    let err = anonybench::api::serve(Arc::clone(&f.state), port).await.unwrap_err();
    assert!(err.to_string().contains("cannot listen"), "{err}");
}
