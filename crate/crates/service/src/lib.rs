//! HTTP JSON API for interactive exploration of M-out-of-N systems.
//!
//! Routes live under `/api/v1`; everything else is served from the static
//! UI directory.

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

pub mod api;
pub mod config;
pub mod error;

pub use config::ServiceConfig;
pub use error::{ApiError, FieldError};

use api::Endpoint;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    pool: Arc<rayon::ThreadPool>,
    jobs: Arc<Semaphore>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .thread_name(|i| format!("moonlab-worker-{i}"))
            .build()?;
        Ok(Self {
            jobs: Arc::new(Semaphore::new(config.max_jobs)),
            pool: Arc::new(pool),
            config: Arc::new(config),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Runs `f` on the worker pool once a job slot is free.
    async fn run<T, F>(&self, f: F) -> Result<Timed<T>, ApiError>
    where
        T: Send + 'static,
        F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    {
        let _permit = self
            .jobs
            .acquire()
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        let pool = Arc::clone(&self.pool);
        let started = Instant::now();
        let result = tokio::task::spawn_blocking(move || pool.install(f))
            .await
            .map_err(|e| ApiError::Internal(e.to_string()))??;
        Ok(Timed {
            result,
            compute_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }
}

/// A payload with its wall-clock compute time kept apart from the results.
#[derive(Serialize)]
pub struct Timed<T> {
    #[serde(flatten)]
    pub result: T,
    pub compute_ms: f64,
}

#[derive(Serialize)]
pub struct Health {
    pub status: &'static str,
    pub version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: VERSION,
    })
}

async fn simulate(State(state): State<AppState>, body: Bytes) -> Result<Json<Timed<api::SimulationResult>>, ApiError> {
    let req = api::resolve(api::parse_body(&body)?, Endpoint::Simulate, state.config.sample_cap)?;
    Ok(Json(state.run(move || api::simulate(&req)).await?))
}

async fn sweep(State(state): State<AppState>, body: Bytes) -> Result<Json<Timed<api::SweepResultPayload>>, ApiError> {
    let req = api::resolve(api::parse_body(&body)?, Endpoint::Sweep, state.config.sample_cap)?;
    Ok(Json(state.run(move || api::sweep(&req)).await?))
}

async fn oracle(State(state): State<AppState>, body: Bytes) -> Result<Json<Timed<api::OracleResult>>, ApiError> {
    let req: api::OracleRequest = api::parse_body(&body)?;
    api::check_oracle(&req)?;
    Ok(Json(state.run(move || api::oracle(&req)).await?))
}

pub fn api_router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/simulate", post(simulate))
        .route("/sweep", post(sweep))
        .route("/oracle", post(oracle))
        .with_state(state)
}

/// API routes plus static files for the UI bundle.
pub fn app(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    Router::new()
        .nest("/api/v1", api_router(state))
        .fallback_service(ServeDir::new(static_dir).append_index_html_on_directories(true))
}
