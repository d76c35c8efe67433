//! HTTP facade over the fitting and lockdown optimization pipeline.
//!
//! Uploaded case archives live in an in-memory session store; every request
//! runs synchronously against an immutable snapshot of its session.

mod error;
mod session;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use lockdown_core::pipeline::{fit_active, forecast, run_optimize, FitWindow, RATE_WINDOW_DAYS};
use lockdown_core::timeseries::{parse_case_archive, rolling_growth_rate, rolling_tpr, ArchiveFormat};
use lockdown_core::{CaseSeries, ForecastPoint, OptimizeReport, PolyModel, RunOptions, Scenario};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;
pub use session::{Session, SessionStore};

/// Idle time after which a session is discarded.
pub const DEFAULT_IDLE: Duration = Duration::from_secs(3600);
/// Forecasts stop at the validity horizon of the trend model.
pub const MAX_FORECAST_DAYS: u32 = lockdown_core::forecaster::VALIDITY_HORIZON_DAYS as u32;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<SessionStore>,
}

impl AppState {
    pub fn new(idle: Duration) -> Self {
        AppState {
            sessions: Arc::new(SessionStore::new(idle)),
        }
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }
}

impl Default for AppState {
    fn default() -> Self {
        Self::new(DEFAULT_IDLE)
    }
}

/// Service configuration read from the environment.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub idle: Duration,
    /// Allowed CORS origin; any origin when unset.
    pub dashboard_origin: Option<String>,
}

impl ServiceConfig {
    /// `PORT` (default 8080), `SESSION_IDLE_SECS` (default 3600) and
    /// `DASHBOARD_ORIGIN`.
    pub fn from_env() -> Result<Self, String> {
        let port = match std::env::var("PORT") {
            Ok(p) => p.parse().map_err(|_| format!("PORT {p:?} is not a valid port"))?,
            Err(_) => 8080,
        };
        let idle = match std::env::var("SESSION_IDLE_SECS") {
            Ok(s) => Duration::from_secs(
                s.parse()
                    .map_err(|_| format!("SESSION_IDLE_SECS {s:?} is not a number of seconds"))?,
            ),
            Err(_) => DEFAULT_IDLE,
        };
        Ok(ServiceConfig {
            port,
            idle,
            dashboard_origin: std::env::var("DASHBOARD_ORIGIN").ok(),
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/v1/series", post(upload_series))
        .route("/v1/sessions/{id}/optimize", post(optimize))
        .route("/v1/sessions/{id}/forecast", get(get_forecast))
        .with_state(state)
}

fn cors(origin: Option<&str>) -> Result<CorsLayer, String> {
    let allow = match origin {
        Some(o) => AllowOrigin::exact(HeaderValue::from_str(o).map_err(|_| format!("bad origin {o:?}"))?),
        None => AllowOrigin::any(),
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods(tower_http::cors::Any)
        .allow_headers(tower_http::cors::Any))
}

/// Router with CORS for the dashboard origin.
pub fn app(state: AppState, dashboard_origin: Option<&str>) -> Result<Router, String> {
    Ok(router(state).layer(cors(dashboard_origin)?))
}

/// Serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let app = app(AppState::new(config.idle), config.dashboard_origin.as_deref())
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn healthz() -> &'static str {
    "ok"
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub region: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub days: usize,
    pub active_latest: u64,
    pub growth_rate_7d: Option<f64>,
    /// Absent when the archive carries no test counts.
    pub tpr_7d: Option<f64>,
}

impl SeriesSummary {
    pub fn of(cs: &CaseSeries) -> Self {
        let latest = |r: Result<lockdown_core::RateSeries, _>| r.ok().and_then(|s| s.latest().map(|(_, v)| v));
        SeriesSummary {
            region: cs.region().to_string(),
            start: cs.first_date(),
            end: cs.last_date(),
            days: cs.len(),
            active_latest: cs.active_at(cs.len() - 1),
            growth_rate_7d: latest(rolling_growth_rate(cs, RATE_WINDOW_DAYS)),
            tpr_7d: latest(rolling_tpr(cs, RATE_WINDOW_DAYS)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesCreated {
    pub session_id: String,
    pub summary: SeriesSummary,
}

async fn upload_series(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<SeriesCreated>), ApiError> {
    let format = ArchiveFormat::sniff(&body);
    let series = parse_case_archive(body.as_ref(), format)?;
    let summary = SeriesSummary::of(&series);
    let session_id = state.sessions.create(series);
    Ok((StatusCode::CREATED, Json(SeriesCreated { session_id, summary })))
}

/// Body of an optimize request: the scenario plus optional run settings
/// (same fields and defaults as the command line).
#[derive(Debug, Clone, Deserialize)]
pub struct OptimizeRequest {
    pub scenario: serde_json::Value,
    #[serde(default)]
    pub fit: Option<serde_json::Value>,
}

async fn optimize(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<OptimizeReport>, ApiError> {
    let session = state.sessions.get(&id)?;
    let request: OptimizeRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::Validation("MalformedRequest", e.to_string()))?;
    let scenario: Scenario = serde_json::from_value(request.scenario)
        .map_err(|e| ApiError::Validation("MalformedScenario", e.to_string()))?;
    let options: RunOptions = match request.fit {
        Some(v) => serde_json::from_value(v).map_err(|e| ApiError::Validation("InvalidConfig", e.to_string()))?,
        None => RunOptions::default(),
    };
    let report = run_optimize(&session.series, &scenario, &options)?;
    state
        .sessions
        .record_fit(&id, report.model.clone(), report.window, scenario);
    Ok(Json(report))
}

#[derive(Debug, Clone, Deserialize)]
pub struct ForecastQuery {
    pub days: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForecastResponse {
    pub window: FitWindow,
    pub model: PolyModel,
    pub points: Vec<ForecastPoint>,
}

async fn get_forecast(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<ForecastQuery>,
) -> Result<Json<ForecastResponse>, ApiError> {
    let session = state.sessions.get(&id)?;
    let days = query
        .days
        .ok_or_else(|| ApiError::Validation("InvalidConfig", "query parameter days is required".into()))?;
    if !(1..=MAX_FORECAST_DAYS).contains(&days) {
        return Err(ApiError::Validation(
            "ForecastOutOfRange",
            format!("days must lie in 1..={MAX_FORECAST_DAYS}, got {days}"),
        ));
    }
    // latest fit of this session, or a default fit on the whole upload
    let (model, window) = match session.last_fit {
        Some(fit) => (fit.model, fit.window),
        None => {
            let fit = fit_active::<f64>(&session.series, None, &Default::default())?;
            (fit.model, fit.window)
        }
    };
    let points = forecast(&model, &window, days);
    Ok(Json(ForecastResponse { window, model, points }))
}
