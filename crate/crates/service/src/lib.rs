//! Workflow engine service: an event-sourced store, the HTTP/JSON API with
//! a server-sent event stream, a blocking client and the scenario runner.

pub mod client;
mod error;
pub mod http;
pub mod scenario;
pub mod service;
pub mod store;

pub use client::{Client, ClientError};
pub use error::{status_of, ApiError};
pub use scenario::{run_scenario, run_script, Scenario, ScenarioMismatch, Transcript};
pub use service::{Action, Service};
pub use store::{Store, StoreError};

/// Serves `svc` on `listener` until `shutdown` resolves, then ends open
/// event streams and drains the remaining requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    svc: std::sync::Arc<Service>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let closer = std::sync::Arc::clone(&svc);
    let shutdown = async move {
        shutdown.await;
        closer.close();
    };
    axum::serve(listener, http::router(svc)).with_graceful_shutdown(shutdown).await
}
