use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, Duration, TimeZone, Utc};
use genehub_core::gep::{AgentId, Asset, Capsule, IntrinsicSignals};
use genehub_core::hub::{Hub, HubConfig};
use genehub_server::{router, AppState, RunningServer, ServerConfig, SNAPSHOT_FILE};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 2, 1, 0, 0, 0).unwrap()
}

fn app() -> Router {
    router(AppState::new(Hub::new(HubConfig::default()), None))
}

async fn call(app: &Router, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::Null) };
    (status, value)
}

fn capsule(author: &str, trigger: &str) -> Value {
    let c = Capsule {
        content: "wrap the socket read in a bounded retry with jitter".into(),
        trigger_text: trigger.into(),
        signals: IntrinsicSignals::new(0.99, 10, 1, 5, 5, 200, 50.0).unwrap(),
        parent_genes: vec![],
        summary: "bounded retry".into(),
        author: AgentId::new(author),
    };
    serde_json::to_value(Asset::Capsule(c)).unwrap()
}

async fn register(app: &Router, name: &str) -> String {
    let (status, body) = call(app, Method::POST, "/agents", Some(json!({ "name": name }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["agent_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn publish_recompute_fetch_round_trip() {
    let app = app();
    let alice = register(&app, "alice").await;
    let bob = register(&app, "bob").await;

    let (status, receipt) =
        call(&app, Method::POST, "/assets", Some(json!({ "author": alice, "asset": capsule(&alice, "ECONNRESET reading socket") }))).await;
    assert_eq!(status, StatusCode::OK, "{receipt}");
    assert_eq!(receipt["status"], "candidate");
    let id = receipt["asset_id"].as_str().unwrap().to_string();

    // Not yet discoverable.
    let (_, hits) = call(&app, Method::POST, "/fetch", Some(json!({ "caller": bob, "query": "ECONNRESET reading socket" }))).await;
    assert_eq!(hits, json!([]));

    let (status, report) = call(&app, Method::POST, "/recompute", Some(json!({ "now": t0() }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["promoted"], json!([id]));

    let (_, hits) = call(&app, Method::POST, "/fetch", Some(json!({ "caller": bob, "query": "ECONNRESET reading socket" }))).await;
    assert_eq!(hits[0]["asset_id"], json!(id));

    let (_, record) = call(&app, Method::GET, &format!("/assets/{id}"), None).await;
    assert_eq!(record["status"], "promoted");
    assert_eq!(record["counters"]["call_count"], 1);

    let (_, listing) = call(&app, Method::GET, "/assets", None).await;
    assert_eq!(listing.as_array().unwrap().len(), 1);

    let (_, c) = call(&app, Method::GET, "/conservation", None).await;
    assert_eq!(c["conserved"], true);
    let (_, ledger) = call(&app, Method::GET, &format!("/agents/{alice}/ledger"), None).await;
    let reasons: Vec<&str> = ledger.as_array().unwrap().iter().map(|e| e["reason"].as_str().unwrap()).collect();
    assert_eq!(reasons, ["registration", "publish_fee", "promotion", "asset_called"]);
}

#[tokio::test]
async fn recompute_with_explicit_now_is_deterministic() {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let app = app();
        let a = register(&app, "a").await;
        call(&app, Method::POST, "/assets", Some(json!({ "author": a, "asset": capsule(&a, "TypeError in parser") }))).await;
        let later = t0() + Duration::days(12);
        let (_, report) = call(&app, Method::POST, "/recompute", Some(json!({ "now": later }))).await;
        let (_, listing) = call(&app, Method::GET, "/assets", None).await;
        outputs.push((report, listing));
    }
    assert_eq!(outputs[0], outputs[1]);
    // Twelve idle days decay freshness below one.
    let gdi = outputs[0].1[0]["gdi"].as_f64().unwrap();
    assert!(gdi < 46.99, "{gdi}");
}

#[tokio::test]
async fn recompute_without_now_uses_the_logical_clock() {
    let app = app();
    let (status, report) = call(&app, Method::POST, "/recompute", Some(json!({}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["recomputed"], 0);
}

#[tokio::test]
async fn malformed_requests_get_machine_readable_errors() {
    let app = app();
    let (status, body) = call(&app, Method::POST, "/agents", Some(json!({ "nom": "x" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "invalid_request");
    assert!(body["message"].as_str().unwrap().contains("name"));

    let req = Request::builder().method(Method::POST).uri("/fetch").header("content-type", "application/json");
    let resp = app.clone().oneshot(req.body(Body::from("{not json")).unwrap()).await.unwrap();
    assert!(resp.status().is_client_error());
    let body: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(body["code"], "invalid_request");

    let (status, body) = call(&app, Method::GET, "/assets/not-a-hash", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "invalid_request");

    let missing = "0".repeat(64);
    let (status, body) = call(&app, Method::GET, &format!("/assets/{missing}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "unknown_asset");
    assert_eq!(body["asset"], json!(missing));

    let (status, body) = call(&app, Method::GET, "/agents/ghost/balance", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "unknown_agent");

    let (status, body) = call(&app, Method::POST, "/snapshot", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "invalid_request");
}

#[tokio::test]
async fn domain_errors_map_to_statuses() {
    let app = app();
    let a = register(&app, "a").await;
    let asset = capsule(&a, "ENOENT opening config");
    call(&app, Method::POST, "/assets", Some(json!({ "author": a, "asset": asset }))).await;
    let (status, body) = call(&app, Method::POST, "/assets", Some(json!({ "author": a, "asset": asset }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "duplicate_asset");

    let (_, listing) = call(&app, Method::GET, "/assets", None).await;
    let id = listing[0]["asset_id"].as_str().unwrap();
    let (status, body) = call(&app, Method::POST, &format!("/assets/{id}/votes"), Some(json!({ "voter": a, "direction": "up" }))).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(body["code"], "self_vote");

    let (status, body) = call(
        &app,
        Method::POST,
        "/bounties",
        Some(json!({ "poster": a, "title": "t", "signals": ["x"], "amount": 10_000, "expires_at": t0() + Duration::days(1) })),
    )
    .await;
    assert_eq!(status, StatusCode::PAYMENT_REQUIRED);
    assert_eq!(body["code"], "insufficient_credits");
    assert_eq!(body["required"], 10_000);
}

#[tokio::test]
async fn bounty_lifecycle_over_http() {
    let app = app();
    let poster = register(&app, "poster").await;
    let solver = register(&app, "solver").await;
    let (status, posted) = call(
        &app,
        Method::POST,
        "/bounties",
        Some(json!({ "poster": poster, "title": "flaky socket", "signals": ["socket", "retry"], "amount": 20, "expires_at": t0() + Duration::days(2) })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let bounty = posted["bounty_id"].as_str().unwrap().to_string();

    let (_, receipt) =
        call(&app, Method::POST, "/assets", Some(json!({ "author": solver, "asset": capsule(&solver, "socket retry storm") }))).await;
    let asset = receipt["asset_id"].clone();
    let (status, sub) =
        call(&app, Method::POST, &format!("/bounties/{bounty}/submissions"), Some(json!({ "submitter": solver, "asset": asset }))).await;
    assert_eq!(status, StatusCode::OK, "{sub}");
    assert_eq!(sub["index"], 0);

    let (status, res) = call(&app, Method::POST, &format!("/bounties/{bounty}/resolve"), None).await;
    assert_eq!(status, StatusCode::OK, "{res}");
    assert_eq!(res["winner"], json!(solver));
    let (_, b) = call(&app, Method::GET, &format!("/bounties/{bounty}"), None).await;
    assert_eq!(b["status"], "settled");
    let (status, body) = call(&app, Method::POST, &format!("/bounties/{bounty}/resolve"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "already_settled");
    let (_, all) = call(&app, Method::GET, "/bounties", None).await;
    assert_eq!(all.as_array().unwrap().len(), 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writers_are_serialized() {
    let app = app();
    let tasks: Vec<_> = (0..64)
        .map(|i| {
            let app = app.clone();
            tokio::spawn(async move { register(&app, &format!("agent-{i}")).await })
        })
        .collect();
    let mut ids = Vec::new();
    for t in tasks {
        ids.push(t.await.unwrap());
    }
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 64);
    let (_, c) = call(&app, Method::GET, "/conservation", None).await;
    assert_eq!(c["conserved"], true);
    assert_eq!(c["totals"]["minted"], 64 * 200);
}

#[tokio::test]
async fn shutdown_persists_and_restart_restores() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServerConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        hub: HubConfig::default(),
        data_dir: Some(dir.path().to_path_buf()),
    };
    let server = RunningServer::start(config.clone()).await.unwrap();
    let agent = server.state.hub().register_agent("persistent").unwrap();
    server.shutdown().await.unwrap();
    assert!(dir.path().join(SNAPSHOT_FILE).exists());

    let server = RunningServer::start(config).await.unwrap();
    assert_eq!(server.state.hub().balance(&agent), 200);
    assert!(server.state.hub().agent(&agent).is_some());
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn invalid_config_and_busy_port_are_reported() {
    let bad = ServerConfig {
        hub: HubConfig { publish_fee: -1, ..HubConfig::default() },
        addr: "127.0.0.1:0".parse().unwrap(),
        data_dir: None,
    };
    assert!(matches!(RunningServer::start(bad).await, Err(genehub_server::ServerError::ConfigInvalid(_))));

    let first = RunningServer::start(ServerConfig { addr: "127.0.0.1:0".parse().unwrap(), ..ServerConfig::default() })
        .await
        .unwrap();
    let taken = ServerConfig { addr: first.addr, ..ServerConfig::default() };
    assert!(matches!(RunningServer::start(taken).await, Err(genehub_server::ServerError::BindFailure { .. })));
    first.shutdown().await.unwrap();
}
