//! HTTP front of the workbench: one `POST /v1/<operation>` route per
//! operation, JSON in and out. Operations run on the blocking pool because
//! designs and simulations can take minutes.

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use esrl_core::service::{self, ErrorBody};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::net::TcpListener;

/// Route paths, in the order they are registered.
pub const OPERATIONS: [&str; 9] =
    ["design", "lift", "analyze", "threshold", "encode", "simulate", "harq", "validate", "repro"];

fn error(status: StatusCode, kind: &str, message: String) -> Response {
    (status, Json(ErrorBody { kind: kind.into(), message })).into_response()
}

async fn run<Req, Resp>(body: Bytes, f: fn(&Req) -> esrl_core::Result<Resp>) -> Response
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
{
    let req: Req = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, "request", e.to_string()),
    };
    match tokio::task::spawn_blocking(move || f(&req)).await {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => (StatusCode::UNPROCESSABLE_ENTITY, Json(ErrorBody::from(&e))).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("operation panicked: {e}")),
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/v1/design", post(|b: Bytes| run(b, service::handle_design)))
        .route("/v1/lift", post(|b: Bytes| run(b, service::handle_lift)))
        .route("/v1/analyze", post(|b: Bytes| run(b, service::handle_analyze)))
        .route("/v1/threshold", post(|b: Bytes| run(b, service::handle_threshold)))
        .route("/v1/encode", post(|b: Bytes| run(b, service::handle_encode)))
        .route("/v1/simulate", post(|b: Bytes| run(b, service::handle_simulate)))
        .route("/v1/harq", post(|b: Bytes| run(b, service::handle_harq)))
        .route("/v1/validate", post(|b: Bytes| run(b, service::handle_validate)))
        .route("/v1/repro", post(|b: Bytes| run(b, service::handle_repro)))
        .layer(axum::extract::DefaultBodyLimit::max(64 << 20))
}

/// Serves the router on an already bound listener until the task is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}
