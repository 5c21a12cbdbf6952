//! HTTP service for comparing process models discovered from slices of one event log.
//!
//! Logs live as files in a root directory. A session holds any number of filtered
//! slices of one log; one pair of them is compared at a time.

use std::fs;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post, put};
use axum::Router;
use cpm_core::demo::generate_demo_log;
use cpm_core::event_log::write_xes;

pub mod api;
pub mod config;
pub mod error;
pub mod session;
pub mod store;

pub use config::Config;
pub use error::ApiError;
pub use session::{ActivePair, ComparisonSession, SessionStore};
pub use store::{LogFormat, LogStore, LogStoreEntry};

#[derive(Clone)]
pub struct AppState {
    pub logs: Arc<LogStore>,
    pub sessions: Arc<SessionStore>,
}

/// File name of the log written by `--demo`.
pub fn demo_file_name() -> String {
    format!("demo-seed{}.xes", config::DEMO_SEED)
}

impl AppState {
    /// Opens the root directory: writes the demo log if asked, loads every log
    /// file, then restores saved sessions.
    pub fn open(config: &Config) -> std::io::Result<Self> {
        fs::create_dir_all(&config.root)?;
        if config.demo {
            let path = config.root.join(demo_file_name());
            if !path.exists() {
                let log = generate_demo_log(config::DEMO_SEED, config::DEMO_CASES)
                    .expect("demo case count is positive");
                write_xes(&log, fs::File::create(&path)?)?;
            }
        }
        let logs = Arc::new(LogStore::open(&config.root)?);
        let sessions = Arc::new(SessionStore::load(&logs)?);
        Ok(AppState { logs, sessions })
    }
}

pub fn router(state: AppState, max_upload_bytes: usize) -> Router {
    Router::new()
        .route("/api/logs", get(api::list_logs).post(api::upload_log))
        .route("/api/logs/{id}/schema", get(api::log_schema))
        .route("/api/sessions", post(api::create_session))
        .route("/api/sessions/{id}", get(api::get_session))
        .route("/api/sessions/{id}/slices", post(api::add_slice))
        .route("/api/sessions/{id}/active_pair", put(api::put_active_pair))
        .route("/api/sessions/{id}/comparison", get(api::get_comparison))
        .route("/api/sessions/{id}/export", get(api::export))
        .fallback(api::not_found)
        .layer(DefaultBodyLimit::max(max_upload_bytes))
        .with_state(state)
}

/// Opens the state described by `config` and builds its router.
pub fn app(config: &Config) -> std::io::Result<Router> {
    Ok(router(AppState::open(config)?, config.max_upload_bytes))
}
