//! HTTP and WebSocket front end.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use pcg_core::geom::{encode_frame, export_obj};
use pcg_core::Scalar;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ServiceError;
use crate::manager::{SessionManager, Update};
use crate::session::ParamState;

#[derive(Clone)]
struct AppState {
    manager: Arc<SessionManager>,
    token: Option<Arc<str>>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self {
            ServiceError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ServiceError::Invalid { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_graph"),
            ServiceError::Eval(_) => (StatusCode::UNPROCESSABLE_ENTITY, "evaluation"),
            ServiceError::Generation { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "generation"),
            ServiceError::Llm(_) => (StatusCode::BAD_GATEWAY, "llm"),
            ServiceError::NoModel => (StatusCode::SERVICE_UNAVAILABLE, "no_model"),
            ServiceError::Corrupt(_) | ServiceError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "store"),
        };
        let body = json!({
            "error": kind,
            "message": self.to_string(),
            "diagnostics": self.diagnostics(),
            "raw_response": self.raw_response(),
        });
        (status, Json(body)).into_response()
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ServiceError::Corrupt(format!("worker failed: {e}"))))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub instruction: Option<String>,
    pub pcg: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRequest {
    pub name: String,
    pub value: Scalar,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditRequest {
    pub instruction: String,
}

/// Text message sent on the stream before each binary mesh frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlMessage {
    pub revision: u64,
    pub params: Vec<ParamState>,
}

async fn create(State(app): State<AppState>, Json(req): Json<CreateRequest>) -> Result<Response, ServiceError> {
    let m = app.manager.clone();
    let state = match (req.instruction, req.pcg) {
        (None, Some(pcg)) => blocking(move || m.create_from_pcg(&pcg)).await?,
        (Some(instruction), None) => blocking(move || m.create_from_instruction(&instruction)).await?,
        _ => return Err(ServiceError::BadRequest("give exactly one of `instruction` or `pcg`".into())),
    };
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(app.manager.state(&id)?).into_response())
}

async fn set_param(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<ParamRequest>,
) -> Result<Response, ServiceError> {
    let m = app.manager.clone();
    let state = blocking(move || m.apply_param(&id, &req.name, req.value)).await?;
    Ok(Json(state).into_response())
}

async fn text_edit(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<EditRequest>,
) -> Result<Response, ServiceError> {
    let m = app.manager.clone();
    let state = blocking(move || m.apply_text_edit(&id, &req.instruction)).await?;
    Ok(Json(state).into_response())
}

async fn mesh_obj(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let mesh = app.manager.mesh(&id)?;
    let body = tokio::task::spawn_blocking(move || export_obj(&mesh))
        .await
        .map_err(|e| ServiceError::Corrupt(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "model/obj")], body).into_response())
}

async fn stream(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ServiceError> {
    let rx = app.manager.subscribe(&id)?;
    Ok(ws.on_upgrade(move |socket| push_updates(socket, rx)))
}

async fn send_update(socket: &mut WebSocket, update: &Update) -> Result<(), axum::Error> {
    let control = ControlMessage {
        revision: update.revision,
        params: update.params.clone(),
    };
    let text = serde_json::to_string(&control).expect("control message serializes");
    socket.send(Message::Text(text.into())).await?;
    socket.send(Message::Binary(encode_frame(&update.mesh).into())).await
}

/// Sends the current revision, then the latest one after every change.
/// Revisions published while a send is in flight collapse into one.
async fn push_updates(mut socket: WebSocket, mut rx: tokio::sync::watch::Receiver<Arc<Update>>) {
    loop {
        let update = rx.borrow_and_update().clone();
        if send_update(&mut socket, &update).await.is_err() {
            return;
        }
        tokio::select! {
            changed = rx.changed() => {
                if changed.is_err() {
                    return;
                }
            }
            msg = socket.recv() => {
                match msg {
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                    Some(Ok(_)) => {}
                }
            }
        }
    }
}

#[derive(Deserialize)]
struct TokenQuery {
    access_token: Option<String>,
}

/// Shared bearer token, from the `Authorization` header or an
/// `access_token` query parameter for WebSocket clients.
async fn require_token(
    State(app): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<TokenQuery>,
    req: Request,
    next: Next,
) -> Response {
    let Some(expected) = app.token.as_deref() else {
        return next.run(req).await;
    };
    let header_token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if header_token == Some(expected) || q.access_token.as_deref() == Some(expected) {
        next.run(req).await
    } else {
        (
            StatusCode::UNAUTHORIZED,
            Json(json!({"error": "unauthorized", "message": "missing or wrong bearer token"})),
        )
            .into_response()
    }
}

/// Routes for `manager`. With `token`, every request must carry it.
pub fn router(manager: Arc<SessionManager>, token: Option<String>) -> Router {
    let app = AppState {
        manager,
        token: token.map(Arc::from),
    };
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(get_state))
        .route("/sessions/{id}/params", patch(set_param))
        .route("/sessions/{id}/edits", post(text_edit))
        .route("/sessions/{id}/mesh.obj", get(mesh_obj))
        .route("/sessions/{id}/stream", get(stream))
        .layer(middleware::from_fn_with_state(app.clone(), require_token))
        .with_state(app)
}

/// Serves `router` until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, router: Router) -> std::io::Result<()> {
    axum::serve(listener, router).await
}
