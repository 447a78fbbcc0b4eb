use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use humble_core::synth::{sample_jobs, synthetic_pool};
use humble_core::{RunParams, Store};
use humble_service::{router, AppState};

fn app() -> (tempfile::TempDir, Router) {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    store.import_pool(&synthetic_pool(60, 3)).unwrap();
    store.import_jobs(&sample_jobs()).unwrap();
    let defaults = RunParams {
        samples: 20,
        draws: 400,
        k: 10,
        ..RunParams::default()
    };
    (dir, router(AppState::new(store, defaults)))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn screened(app: &Router) -> String {
    let (status, body) = call(app, "POST", "/jobs/j01/screen", Some(json!({"k": 10}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["status"], "complete");
    body["run_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn jobs_listing_and_filter() {
    let (_dir, app) = app();
    let (status, all) = call(&app, "GET", "/jobs", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(all.as_array().unwrap().len(), 14);

    let (_, open) = call(&app, "GET", "/jobs?status=open", None).await;
    let open = open.as_array().unwrap();
    assert!(!open.is_empty() && open.len() < 14);
    assert!(open.iter().all(|j| j["status"] == "open"));

    let (status, _) = call(&app, "GET", "/jobs?status=bogus", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, job) = call(&app, "GET", "/jobs/j05", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(job["job"]["title"], "Senior Mobile Engineer (iOS)");
    assert_eq!(job["runs"], json!([]));

    let (status, err) = call(&app, "GET", "/jobs/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(err["error"].as_str().unwrap().contains("nope"));
}

#[tokio::test]
async fn screen_then_read_back() {
    let (_dir, app) = app();
    let run_id = screened(&app).await;
    assert_eq!(screened(&app).await, run_id);

    let (status, run) = call(&app, "GET", &format!("/runs/{run_id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(run["job_id"], "j01");
    assert_eq!(run["humble_order"].as_array().unwrap().len(), 60);
    assert!(run.get("rank_set").is_none());

    let (_, job) = call(&app, "GET", "/jobs/j01", None).await;
    assert_eq!(job["runs"].as_array().unwrap().len(), 1);
    let (_, jobs) = call(&app, "GET", "/jobs", None).await;
    let j01 = jobs.as_array().unwrap().iter().find(|j| j["id"] == "j01").unwrap().clone();
    assert_eq!(j01["matches"], 60);
    assert_eq!(j01["latest_run"], run_id.as_str());

    let (status, report) = call(&app, "GET", &format!("/runs/{run_id}/report"), None).await;
    assert_eq!(status, StatusCode::OK);
    let row = report["row"].as_str().unwrap();
    assert!(row.starts_with("ReactJS Developer  "), "{row}");
    assert!(report["rbo"].as_f64().unwrap() <= 1.0);
}

#[tokio::test]
async fn shortlist_query() {
    let (_dir, app) = app();
    let run_id = screened(&app).await;

    let (status, s) = call(&app, "GET", &format!("/runs/{run_id}/shortlist?k=10&rho=0.2"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["exploit"].as_array().unwrap().len(), 8);
    assert_eq!(s["explore"].as_array().unwrap().len(), 2);
    assert!(s["exploit"][0]["uncertainty"]["entropy"].is_number());

    let (_, plain) = call(&app, "GET", &format!("/runs/{run_id}/shortlist?k=10&humble=false"), None).await;
    assert_eq!(plain["exploit"].as_array().unwrap().len(), 10);
    assert_eq!(plain["explore"], json!([]));
    assert!(plain["exploit"][0].get("uncertainty").is_none());

    for bad in ["k=0", "rho=2", "k=abc"] {
        let (status, _) = call(&app, "GET", &format!("/runs/{run_id}/shortlist?{bad}"), None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
    let (status, _) = call(&app, "GET", "/runs/run-0000000000000000/shortlist", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn rankset_threshold() {
    let (_dir, app) = app();
    let run_id = screened(&app).await;

    let (status, rs) = call(&app, "GET", &format!("/runs/{run_id}/rankset"), None).await;
    assert_eq!(status, StatusCode::OK);
    let triplets = rs["triplets"].as_array().unwrap();
    assert!(!triplets.is_empty());
    assert!(triplets.iter().all(|t| t["probability"].as_f64().unwrap() >= 0.01));

    let (_, coarse) = call(&app, "GET", &format!("/runs/{run_id}/rankset?threshold=0.3"), None).await;
    assert!(coarse["triplets"].as_array().unwrap().len() < triplets.len());

    let (status, _) = call(&app, "GET", &format!("/runs/{run_id}/rankset?threshold=1.0"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn screen_errors() {
    let (_dir, app) = app();
    let (status, _) = call(&app, "POST", "/jobs/nope/screen", Some(json!({}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/jobs/j01/screen", Some(json!({"draws": 0}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/jobs/j01/screen", Some(json!({"mask_prob": 1.0}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/jobs/j01/screen", Some(json!({"colour": "red"}))).await;
    assert!(status.is_client_error());
    let (status, body) = call(&app, "POST", "/jobs/j02/screen", None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let (status, _) = call(&app, "GET", "/runs/..%2Fpool", None).await;
    assert!(status.is_client_error());
}
