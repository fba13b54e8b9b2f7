use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use fibnim_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

fn app() -> Router {
    router(AppState::new(ServiceConfig::default()))
}

#[tokio::test]
async fn health() {
    let (status, body) = call(&app(), "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn create_and_fetch() {
    let app = app();
    let (status, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [3, 4, 10]}))).await;
    assert_eq!(status, StatusCode::OK, "{s}");
    assert_eq!(s["piles"], json!([3, 4, 10]));
    assert_eq!(s["bound"], "inf");
    assert_eq!(s["dynamic"], "fibonacci");
    assert_eq!(s["status"], "in_progress");
    assert_eq!(s["to_move"], "human");
    assert_eq!(s["max_take"], json!([3, 4, 10]));
    let id = s["id"].as_str().unwrap();
    let (status, again) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again, s);
}

#[tokio::test]
async fn engine_first() {
    let app = app();
    let req = json!({"piles": [10], "bound": 2, "human_first": false});
    let (_, s) = call(&app, "POST", "/api/session", Some(req)).await;
    assert_eq!(s["history"][0]["actor"], "engine");
    assert_eq!(s["history"][0]["take"], 2);
    assert_eq!(s["piles"], json!([8]));
    assert_eq!(s["bound"], 4);
}

#[tokio::test]
async fn move_gets_engine_reply() {
    let app = app();
    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [3, 4, 10], "hints": true}))).await;
    let id = s["id"].as_str().unwrap().to_string();
    let (status, s) = call(
        &app,
        "POST",
        &format!("/api/session/{id}/move"),
        Some(json!({"pile_index": 2, "take": 1})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{s}");
    let history = s["history"].as_array().unwrap();
    assert_eq!(history.len(), 2);
    assert_eq!(history[0]["actor"], "human");
    assert_eq!(history[1]["actor"], "engine");
    assert_eq!(s["to_move"], "human");
}

#[tokio::test]
async fn illegal_move_echoes_bound() {
    let app = app();
    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [10], "bound": 2}))).await;
    let id = s["id"].as_str().unwrap();
    let (status, err) = call(
        &app,
        "POST",
        &format!("/api/session/{id}/move"),
        Some(json!({"pile_index": 0, "take": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "illegal_move");
    assert_eq!(err["detail"]["bound"], 2);
    assert_eq!(err["detail"]["max_take"], 2);
    assert!(err["message"].as_str().unwrap().contains("between 1 and 2"));
}

#[tokio::test]
async fn hints() {
    let app = app();
    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [10], "bound": 2, "hints": true}))).await;
    let id = s["id"].as_str().unwrap();
    let (status, hint) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(hint, json!({"outcome": "N", "move": {"pile_index": 0, "take": 2}}));

    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [13], "bound": 12, "hints": true}))).await;
    let id = s["id"].as_str().unwrap();
    let (_, hint) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
    assert_eq!(hint, json!({"outcome": "P", "move": null}));

    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [10], "bound": 2}))).await;
    let id = s["id"].as_str().unwrap();
    let (status, err) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(err["code"], "hints_disabled");
}

#[tokio::test]
async fn errors_are_json() {
    let app = app();
    let (status, err) = call(&app, "GET", "/api/session/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");

    let (status, err) = call(&app, "POST", "/api/session", Some(json!({"piles": [0, 0]}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "invalid_position");

    let (status, err) = call(&app, "POST", "/api/session", Some(json!({"piles": "three"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "bad_request");

    let (status, err) = call(&app, "GET", "/api/unknown", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");
}

#[tokio::test]
async fn game_over_after_last_stone() {
    let app = app();
    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [2], "dynamic": "power_of_two"}))).await;
    let id = s["id"].as_str().unwrap();
    let uri = format!("/api/session/{id}/move");
    let (_, s) = call(&app, "POST", &uri, Some(json!({"pile_index": 0, "take": 2}))).await;
    assert_eq!(s["status"], "human_won");
    assert_eq!(s["multiplier"], 1);
    let (status, err) = call(&app, "POST", &uri, Some(json!({"pile_index": 0, "take": 1}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "game_over");
}

#[tokio::test]
async fn static_files_are_served() {
    let dir = std::env::temp_dir().join(format!("fibnim-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<h1>board</h1>").unwrap();
    let config = ServiceConfig {
        static_dir: Some(dir.clone()),
        ..ServiceConfig::default()
    };
    let app = router(AppState::new(config));
    let (status, body) = call(&app, "GET", "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<h1>board</h1>".into()));
    let (status, _) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    std::fs::remove_dir_all(dir).unwrap();
}

#[tokio::test]
async fn snapshot_round_trip_and_eviction() {
    let path = std::env::temp_dir().join(format!("fibnim-snapshot-{}.json", std::process::id()));
    let config = ServiceConfig {
        ttl: Duration::from_secs(60),
        ..ServiceConfig::default()
    };
    let state = AppState::new(config.clone());
    let app = router(state.clone());
    let (_, s) = call(&app, "POST", "/api/session", Some(json!({"piles": [5, 6]}))).await;
    let id = s["id"].as_str().unwrap().to_string();
    call(&app, "POST", &format!("/api/session/{id}/move"), Some(json!({"pile_index": 0, "take": 1}))).await;
    state.write_snapshot(&path).unwrap();

    let restored = AppState::new(config);
    assert_eq!(restored.load_snapshot(&path).unwrap(), 1);
    let view = restored.get(&id).unwrap();
    assert_eq!(serde_json::to_value(&view).unwrap(), call(&app, "GET", &format!("/api/session/{id}"), None).await.1);
    std::fs::remove_file(&path).unwrap();

    assert_eq!(restored.evict_expired(Instant::now()), 0);
    assert_eq!(restored.evict_expired(Instant::now() + Duration::from_secs(120)), 1);
    assert_eq!(restored.session_count(), 0);
}
