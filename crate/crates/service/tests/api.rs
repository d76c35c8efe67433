use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lockdown_core::sample;
use lockdown_service::{app, router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn upload(app: &Router, body: &str) -> String {
    let (status, created) = call(app, "POST", "/v1/series", body.to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    created["session_id"].as_str().unwrap().to_string()
}

fn delhi_scenario() -> Value {
    serde_json::from_str(sample::DELHI_SCENARIO_JSON).unwrap()
}

fn app_default() -> Router {
    router(AppState::default())
}

#[tokio::test]
async fn health_check() {
    let (status, body) = call(&app_default(), "GET", "/healthz", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "ok");
}

#[tokio::test]
async fn upload_summarises_the_archive() {
    let app = app_default();
    let (status, created) = call(&app, "POST", "/v1/series", sample::DELHI_2021_JSON).await;
    assert_eq!(status, StatusCode::CREATED);
    let summary = &created["summary"];
    assert_eq!(summary["active_latest"], 85575);
    assert_eq!(summary["start"], "2021-01-01");
    assert_eq!(summary["end"], "2021-04-20");
    assert_eq!(summary["region"], "DL");
    // 7-day TPR from the last and eighth-to-last archive rows
    let rows: Vec<Vec<u64>> = sample::DELHI_2021_CSV
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let (a, b) = (&rows[rows.len() - 1], &rows[rows.len() - 8]);
    let by_hand = (a[0] - b[0]) as f64 / (a[3] - b[3]) as f64;
    assert_eq!(summary["tpr_7d"].as_f64().unwrap(), by_hand);
    assert!(summary["growth_rate_7d"].as_f64().unwrap() > 0.0);

    let no_tests = "date,confirmed,recovered,deceased\n\
        2021-04-01,100,10,1\n2021-04-02,110,10,1\n2021-04-03,120,10,1\n2021-04-04,130,10,1\n\
        2021-04-05,140,10,1\n2021-04-06,150,10,1\n2021-04-07,160,10,1\n2021-04-08,170,10,1\n";
    let (status, created) = call(&app, "POST", "/v1/series", no_tests).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["summary"]["tpr_7d"], Value::Null);
    assert_eq!(created["summary"]["active_latest"], 159);
}

#[tokio::test]
async fn bad_archives_are_rejected_by_name() {
    let app = app_default();
    let (status, body) = call(&app, "POST", "/v1/series", Body::empty()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "MalformedInput");

    let decreasing = "date,confirmed,recovered,deceased\n2021-04-01,100,0,0\n2021-04-02,90,0,0\n";
    let (status, body) = call(&app, "POST", "/v1/series", decreasing).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "NonMonotoneSeries");
}

#[tokio::test]
async fn delhi_scenario_waits_three_days() {
    let app = app_default();
    let id = upload(&app, sample::DELHI_2021_CSV).await;
    let body = json!({"scenario": delhi_scenario(), "fit": {"end": "2021-04-06"}});
    let (status, report) = call(&app, "POST", &format!("/v1/sessions/{id}/optimize"), body.to_string()).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["status"], "optimal");
    assert_eq!(report["delta_opt"], 3);
    assert_eq!(report["lockdown_date"], "2021-04-10");
    assert_eq!(report["binding"][0]["day_index"], 78);
    assert_eq!(report["model"]["coefficients"].as_array().unwrap().len(), 5);
    assert!(!report["trace"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn optional_constraints() {
    let app = app_default();
    let id = upload(&app, sample::DELHI_2021_CSV).await;
    let uri = format!("/v1/sessions/{id}/optimize");

    let empty = json!({"scenario": {"resources": []}, "fit": {"end": "2021-04-06"}});
    let (status, report) = call(&app, "POST", &uri, empty.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["status"], "unbounded_at_delta_max");

    // archive without tests: a growth cap works, a TPR cap cannot
    let stripped: String = sample::DELHI_2021_CSV
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect();
    let id = upload(&app, &stripped).await;
    let uri = format!("/v1/sessions/{id}/optimize");
    let growth = json!({"scenario": {"resources": [], "growth_cap": 0.5}, "fit": {"end": "2021-04-06"}});
    let (status, report) = call(&app, "POST", &uri, growth.to_string()).await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert!(report["growth_model"].is_object());
    assert!(report.get("tpr_model").is_none());

    let tpr = json!({"scenario": {"resources": [], "tpr_cap": 0.1}, "fit": {"end": "2021-04-06"}});
    let (status, body) = call(&app, "POST", &uri, tpr.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "MissingTests");
}

#[tokio::test]
async fn validation_and_lookup_errors() {
    let app = app_default();
    let (status, body) = call(&app, "POST", "/v1/sessions/nope/optimize", "{}").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownSession");
    let (status, _) = call(&app, "GET", "/v1/sessions/nope/forecast?days=3", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = upload(&app, sample::DELHI_2021_CSV).await;
    let uri = format!("/v1/sessions/{id}/optimize");
    let oxygen = &delhi_scenario()["resources"][0];
    let duplicate = json!({"scenario": {"resources": [oxygen, oxygen]}});
    let (status, body) = call(&app, "POST", &uri, duplicate.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "InvalidResource");

    let malformed = json!({"scenario": {"resources": [{"id": "x"}]}});
    let (status, body) = call(&app, "POST", &uri, malformed.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "MalformedScenario");

    let bad_weights = json!({"scenario": delhi_scenario(), "fit": {"weights": "exp:1.5"}});
    let (status, _) = call(&app, "POST", &uri, bad_weights.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let short = json!({"scenario": delhi_scenario(), "fit": {"window_days": 3}});
    let (status, body) = call(&app, "POST", &uri, short.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "InsufficientData");
}

#[tokio::test]
async fn ill_conditioned_fit_is_a_server_error() {
    let app = app_default();
    let id = upload(&app, sample::DELHI_2021_CSV).await;
    let body = json!({"scenario": delhi_scenario(), "fit": {"degree": 40, "window_days": 60}});
    let (status, body) = call(&app, "POST", &format!("/v1/sessions/{id}/optimize"), body.to_string()).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(body["error"], "SingularSystem");
    assert!(body["detail"].as_str().unwrap().contains("condition"), "{body}");
}

#[tokio::test]
async fn forecast_follows_the_latest_fit() {
    let app = app_default();
    let id = upload(&app, sample::DELHI_2021_CSV).await;
    let body = json!({"scenario": delhi_scenario(), "fit": {"end": "2021-04-06"}});
    let (status, _) = call(&app, "POST", &format!("/v1/sessions/{id}/optimize"), body.to_string()).await;
    assert_eq!(status, StatusCode::OK);

    let (status, fc) = call(&app, "GET", &format!("/v1/sessions/{id}/forecast?days=17"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let points = fc["points"].as_array().unwrap();
    assert_eq!(points.len(), 17);
    let last = &points[16];
    assert_eq!(last["date"], "2021-04-23");
    assert_eq!(last["day_index"], 77);
    // the reported curve gives 57664 on day 77; the fitted one tracks it closely
    let value = last["predicted_active"].as_f64().unwrap();
    assert!((value - 57664.0).abs() / 57664.0 < 0.01, "{value}");

    let (status, fc) = call(&app, "GET", &format!("/v1/sessions/{id}/forecast?days=28"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let points = fc["points"].as_array().unwrap();
    assert_eq!(points.len(), 28);
    assert_eq!(points[27]["low_confidence"], true);
    assert!(points[..27].iter().all(|p| p["low_confidence"] == false));

    for days in ["0", "29", "-1"] {
        let (status, _) = call(&app, "GET", &format!("/v1/sessions/{id}/forecast?days={days}"), Body::empty()).await;
        assert!(status.is_client_error(), "days={days} gave {status}");
    }
    let (status, body) = call(&app, "GET", &format!("/v1/sessions/{id}/forecast?days=0"), Body::empty()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "ForecastOutOfRange");
}

#[tokio::test]
async fn forecast_without_optimize_fits_the_whole_upload() {
    let app = app_default();
    let id = upload(&app, sample::DELHI_2021_CSV).await;
    let (status, fc) = call(&app, "GET", &format!("/v1/sessions/{id}/forecast?days=1"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fc["window"]["end"], "2021-04-20");
    assert_eq!(fc["points"][0]["date"], "2021-04-21");
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = AppState::new(Duration::from_millis(100));
    let app = router(state.clone());
    let id = upload(&app, sample::DELHI_2021_CSV).await;
    assert_eq!(state.sessions().len(), 1);
    tokio::time::sleep(Duration::from_millis(250)).await;
    let (status, _) = call(&app, "GET", &format!("/v1/sessions/{id}/forecast?days=1"), Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(state.sessions().is_empty());
}

#[tokio::test]
async fn sessions_do_not_interfere() {
    let app = app_default();
    let mut handles = Vec::new();
    for capacity in [350.0, 480.0, 5000.0, 480.0, 350.0, 5000.0] {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let id = upload(&app, sample::DELHI_2021_CSV).await;
            let mut scenario = delhi_scenario();
            scenario["resources"][0]["availability"] = json!([[1, capacity]]);
            let body = json!({"scenario": scenario, "fit": {"end": "2021-04-06"}});
            let (_, report) = call(&app, "POST", &format!("/v1/sessions/{id}/optimize"), body.to_string()).await;
            (capacity, report["status"].as_str().unwrap().to_string())
        }));
    }
    for h in handles {
        let (capacity, status) = h.await.unwrap();
        let expected = match capacity {
            c if c < 400.0 => "infeasible_now",
            c if c < 1000.0 => "optimal",
            _ => "unbounded_at_delta_max",
        };
        assert_eq!(status, expected);
    }
}

#[tokio::test]
async fn cors_allows_the_dashboard_origin() {
    let app = app(AppState::default(), Some("http://localhost:5173")).unwrap();
    let request = Request::builder()
        .uri("/healthz")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(
        response.headers().get("access-control-allow-origin").unwrap(),
        "http://localhost:5173"
    );
}
