//! HTTP/JSON service over the supplier-selection engine: stateless model
//! and solver operations plus persistent bidding sessions.
//!
//! Every endpoint lives under `/v1`. Errors are [`ErrorDocument`]s.
//!
//! [`ErrorDocument`]: ssoa_core::api::ErrorDocument

mod error;
mod ops;
mod sessions;
pub mod store;

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;

use ssoa_core::api::Health;

pub use error::ApiError;
use sessions::Slot;
pub use store::Store;

pub struct AppState {
    store: Store,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

impl AppState {
    /// Opens the data directory and replays every stored session.
    pub async fn open(data_dir: impl Into<PathBuf>) -> io::Result<Arc<AppState>> {
        let store = Store::open(data_dir).await?;
        let sessions = store
            .load_all()
            .await?
            .into_iter()
            .map(|s| (s.id.clone(), Slot::new(s)))
            .collect::<HashMap<_, _>>();
        tracing::info!(dir = %store.root().display(), sessions = sessions.len(), "data directory opened");
        Ok(Arc::new(AppState {
            store,
            sessions: RwLock::new(sessions),
        }))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let v1 = Router::new()
        .route("/health", get(health))
        .route("/instances/generate", post(ops::generate))
        .route("/instances/validate", post(ops::validate))
        .route("/models/count", post(ops::count))
        .route("/models/export", post(ops::export))
        .route("/solve", post(ops::solve_instance))
        .route("/two-phase", post(ops::two_phase))
        .route("/heuristics", post(ops::heuristic))
        .route("/tune", post(ops::tune_params))
        .route("/sweeps/sourcing", post(ops::sweep_sourcing_ratios))
        .route("/sweeps/penalty", post(ops::sweep_penalty_values))
        .route("/compare", post(ops::compare))
        .route("/sessions", get(sessions::list).post(sessions::create))
        .route("/sessions/{id}", get(sessions::get))
        .route("/sessions/{id}/summary", get(sessions::summary))
        .route("/sessions/{id}/ledger", get(sessions::ledger))
        .route("/sessions/{id}/close", post(sessions::close))
        .route("/sessions/{id}/rounds", post(sessions::submit_round))
        .route("/sessions/{id}/rounds/{n}/solve", post(sessions::solve_round))
        .route("/sessions/{id}/rounds/{n}/skip", post(sessions::skip_round))
        .route("/sessions/{id}/rounds/{n}/allocation", get(sessions::allocation))
        .route("/sessions/{id}/jobs/{job}", get(sessions::job))
        .route("/sessions/{id}/whatif", post(sessions::what_if))
        .fallback(not_found);
    Router::new()
        .nest(ssoa_core::api::API_PREFIX, v1)
        .fallback(not_found)
        .with_state(state)
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        api: "v1".into(),
    })
}

async fn not_found(uri: axum::http::Uri) -> ApiError {
    ApiError::not_found(format!("no endpoint at {uri}"))
}

pub(crate) fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Binds `addr` and serves in a background task; returns the bound address.
pub async fn spawn(
    addr: SocketAddr,
    data_dir: impl Into<PathBuf>,
) -> io::Result<(SocketAddr, tokio::task::JoinHandle<io::Result<()>>)> {
    let state = AppState::open(data_dir).await?;
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, tokio::spawn(serve(listener, state))))
}
