//! HTTP API over a screening store.
//!
//! | Method | Path | Body |
//! |--------|------|------|
//! | GET  | `/jobs?status=` | `[JobSummary]` |
//! | GET  | `/jobs/{id}` | `JobDetail` |
//! | POST | `/jobs/{id}/screen` | `ScreenRequest` → `ScreenResponse` |
//! | GET  | `/runs/{id}` | `RunView` |
//! | GET  | `/runs/{id}/shortlist?k&humble&rho` | `Shortlist` |
//! | GET  | `/runs/{id}/rankset?threshold` | `RankSetExport` |
//! | GET  | `/runs/{id}/report` | `ReportView` |
//!
//! All bodies are JSON. Errors come back as `{"error": "..."}` with 400 for
//! invalid input, 404 for unknown ids and 409 for incomplete runs.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use humble_core::export::{export_run, RankSetExport};
use humble_core::screening::ScreenedCandidate;
use humble_core::store::RunSummary;
use humble_core::{
    compose_shortlist, CandidateId, ComparisonReport, Error, JobFilter, JobSpec, JobStatus,
    JobSummary, RankStats, RunParams, RunStatus, ScreeningRun, Shortlist, Store,
};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub store_dir: PathBuf,
    /// Parameters used where a screen request leaves a field unset.
    pub defaults: RunParams,
    /// Directory of static UI assets served under `/ui`.
    pub static_dir: Option<PathBuf>,
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<Store>,
    defaults: RunParams,
}

impl AppState {
    pub fn new(store: Store, defaults: RunParams) -> Self {
        AppState {
            store: Arc::new(store),
            defaults,
        }
    }
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::InvalidInput(_) | Error::Ingest(_) => StatusCode::BAD_REQUEST,
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Conflict(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("{}", self.0);
        }
        (status, Json(ErrorBody { error: self.0.to_string() })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Blocking store and pipeline work runs off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, Error> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(Error::Io(std::io::Error::other(e))))?
        .map_err(ApiError)
}

#[derive(Debug, Default, Deserialize)]
pub struct JobsQuery {
    pub status: Option<JobStatus>,
}

async fn list_jobs(State(st): State<AppState>, Query(q): Query<JobsQuery>) -> ApiResult<Vec<JobSummary>> {
    let jobs = blocking(move || st.store.list_jobs(&JobFilter { status: q.status })).await?;
    Ok(Json(jobs))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JobDetail {
    pub job: JobSpec,
    pub runs: Vec<RunSummary>,
}

async fn get_job(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<JobDetail> {
    let detail = blocking(move || {
        let job = st.store.job(&id)?;
        let runs = st
            .store
            .run_index()?
            .into_iter()
            .filter(|r| r.job_id == id)
            .collect();
        Ok(JobDetail { job, runs })
    })
    .await?;
    Ok(Json(detail))
}

/// Screening request. Unset fields fall back to the service defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenRequest {
    pub k: Option<usize>,
    /// Accepted for symmetry with the shortlist query; runs always carry both orderings.
    pub humble: Option<bool>,
    pub entropy_proportion: Option<f64>,
    pub samples: Option<usize>,
    pub draws: Option<u32>,
    pub mask_prob: Option<f64>,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
}

impl ScreenRequest {
    pub fn params(&self, defaults: &RunParams) -> RunParams {
        RunParams {
            samples: self.samples.unwrap_or(defaults.samples),
            mask_prob: self.mask_prob.unwrap_or(defaults.mask_prob),
            draws: self.draws.unwrap_or(defaults.draws),
            threshold: self.threshold.unwrap_or(defaults.threshold),
            k: self.k.unwrap_or(defaults.k),
            entropy_proportion: self.entropy_proportion.unwrap_or(defaults.entropy_proportion),
            persistence: defaults.persistence,
            seed: self.seed.unwrap_or(defaults.seed),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScreenResponse {
    pub run_id: String,
    pub job_id: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

async fn screen_job(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Option<Json<ScreenRequest>>,
) -> Result<(StatusCode, Json<ScreenResponse>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let params = req.params(&st.defaults);
    let run = blocking(move || humble_core::screen(&st.store, &id, &params)).await?;
    let status = match run.status {
        RunStatus::Complete | RunStatus::Pending => StatusCode::OK,
        RunStatus::Failed => StatusCode::UNPROCESSABLE_ENTITY,
    };
    Ok((
        status,
        Json(ScreenResponse {
            run_id: run.run_id,
            job_id: run.job_id,
            status: run.status,
            error: run.error,
        }),
    ))
}

/// A run without its rank-set matrix.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunView {
    pub run_id: String,
    pub job_id: String,
    pub params: RunParams,
    pub created_at: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ComparisonReport>,
    #[serde(default)]
    pub deterministic_order: Vec<CandidateId>,
    #[serde(default)]
    pub humble_order: Vec<CandidateId>,
    #[serde(default)]
    pub candidates: Vec<ScreenedCandidate>,
    #[serde(default)]
    pub stats: Vec<RankStats>,
}

impl From<ScreeningRun> for RunView {
    fn from(run: ScreeningRun) -> Self {
        let mut view = RunView {
            run_id: run.run_id,
            job_id: run.job_id,
            params: run.params,
            created_at: run.created_at,
            status: run.status,
            error: run.error,
            report: None,
            deterministic_order: Vec::new(),
            humble_order: Vec::new(),
            candidates: Vec::new(),
            stats: Vec::new(),
        };
        if let Some(r) = run.results {
            view.report = Some(r.report);
            view.deterministic_order = r.deterministic_order;
            view.humble_order = r.humble_order;
            view.candidates = r.candidates;
            view.stats = r.stats;
        }
        view
    }
}

async fn get_run(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<RunView> {
    let run = blocking(move || st.store.load_run(&id)).await?;
    Ok(Json(run.into()))
}

#[derive(Debug, Default, Deserialize)]
pub struct ShortlistQuery {
    pub k: Option<usize>,
    pub humble: Option<bool>,
    pub rho: Option<f64>,
}

async fn get_shortlist(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ShortlistQuery>,
) -> ApiResult<Shortlist> {
    let shortlist = blocking(move || {
        let run = st.store.load_run(&id)?;
        compose_shortlist(
            &run,
            q.k.unwrap_or(run.params.k),
            q.humble.unwrap_or(true),
            q.rho.unwrap_or(run.params.entropy_proportion),
        )
    })
    .await?;
    Ok(Json(shortlist))
}

#[derive(Debug, Default, Deserialize)]
pub struct RankSetQuery {
    pub threshold: Option<f64>,
}

async fn get_rankset(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RankSetQuery>,
) -> ApiResult<RankSetExport> {
    let export = blocking(move || {
        let run = st.store.load_run(&id)?;
        export_run(&run, q.threshold.unwrap_or(run.params.threshold))
    })
    .await?;
    Ok(Json(export))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportView {
    #[serde(flatten)]
    pub report: ComparisonReport,
    /// `title  similarity  rbo  entropy` at three decimals.
    pub row: String,
}

async fn get_report(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<ReportView> {
    let report = blocking(move || Ok(st.store.load_run(&id)?.results()?.report.clone())).await?;
    Ok(Json(ReportView {
        row: report.row(),
        report,
    }))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/jobs", get(list_jobs))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/screen", post(screen_job))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/shortlist", get(get_shortlist))
        .route("/runs/{id}/rankset", get(get_rankset))
        .route("/runs/{id}/report", get(get_report))
        .with_state(state)
}

pub fn app(config: &ServiceConfig) -> Result<Router, Error> {
    config.defaults.validate()?;
    let store = Store::open(&config.store_dir)?;
    let mut app = router(AppState::new(store, config.defaults));
    if let Some(dir) = &config.static_dir {
        app = app.nest_service("/ui", tower_http::services::ServeDir::new(dir));
    }
    Ok(app)
}

/// Serve until Ctrl-C.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let app = app(&config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
