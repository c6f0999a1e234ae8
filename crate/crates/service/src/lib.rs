//! HTTP service exposing the disco engine: audio upload, waveform peaks,
//! interval editing, previews, brainstorming, render and stitch jobs, and
//! content-addressed artifacts.

pub mod api;
pub mod error;
pub mod fake_backend;
pub mod jobs;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

pub use api::router;
pub use axum::Router;
pub use error::{ApiError, ErrorBody};
pub use jobs::{JobKind, JobRecord, JobStatus};
pub use state::{AppState, ServiceConfig};

/// Build the router over a fresh session.
pub fn app(config: ServiceConfig) -> axum::Router {
    router(AppState::new(config))
}

pub async fn serve(listener: tokio::net::TcpListener, app: axum::Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}

/// Serve `app` on an ephemeral localhost port from a dedicated runtime
/// thread. The server lives until the process exits.
pub fn spawn_background(app: axum::Router) -> std::io::Result<SocketAddr> {
    let listener = std::net::TcpListener::bind("127.0.0.1:0")?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    std::thread::Builder::new().name(format!("disco-http-{}", addr.port())).spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).expect("listener converts");
            let _ = axum::serve(listener, app).await;
        });
    })?;
    Ok(addr)
}

/// The shared state is also handed out for in-process inspection.
pub fn app_with_state(config: ServiceConfig) -> (axum::Router, Arc<AppState>) {
    let state = AppState::new(config);
    (router(Arc::clone(&state)), state)
}
