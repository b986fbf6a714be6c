//! JSON-over-HTTP front end for [`Engine`].

use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use convo_core::dialog::{Engine, ResponseEnvelope, SessionSummary};
use convo_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub device_id: String,
    #[serde(default)]
    pub timezone: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRequest {
    pub text: String,
    #[serde(default)]
    pub debug: bool,
}

/// An error reply: status plus `{"error": ...}`.
#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, msg.into())
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::SessionBusy(_) => StatusCode::CONFLICT,
            Error::SessionEnded(_) => StatusCode::GONE,
            Error::Invalid { .. } | Error::Parse { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("{e}");
        }
        ApiError(status, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Runs blocking engine work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> convo_core::Result<T> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => {
            log::error!("engine task failed: {e}");
            Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal error".into()))
        }
    }
}

async fn create_session(
    State(engine): State<Arc<Engine>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let Json(req) = body?;
    let session_id = blocking(move || engine.create_session(&req.device_id, req.timezone.as_deref(), Utc::now())).await?;
    Ok((StatusCode::CREATED, Json(SessionCreated { session_id })))
}

async fn post_turn(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    body: Result<Json<TurnRequest>, JsonRejection>,
) -> ApiResult<Json<ResponseEnvelope>> {
    let Json(req) = body?;
    if req.text.trim().is_empty() {
        return Err(ApiError::bad_request("text must be non-empty"));
    }
    let env = blocking(move || engine.handle_turn(&id, &req.text, Utc::now(), req.debug)).await?;
    Ok(Json(env))
}

async fn get_session(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    Ok(Json(blocking(move || engine.session_summary(&id)).await?))
}

async fn delete_session(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    Ok(Json(blocking(move || engine.end_session(&id)).await?))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/turns", post(post_turn))
        // the browser client may be served from another origin
        .layer(CorsLayer::permissive())
        .with_state(engine)
}

/// Serves until `shutdown` resolves, then flushes the store.
pub async fn serve(
    engine: Arc<Engine>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    axum::serve(listener, router(Arc::clone(&engine))).with_graceful_shutdown(shutdown).await?;
    let store = Arc::clone(engine.store());
    tokio::task::spawn_blocking(move || store.flush()).await??;
    Ok(())
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::warn!("cannot listen for ctrl-c: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(e) => {
                log::warn!("cannot listen for SIGTERM: {e}");
                std::future::pending::<()>().await;
            }
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    log::info!("shutting down");
}
