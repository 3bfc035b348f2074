//! JSON over HTTP for the difference viewer.
//!
//! `GET /state`, `POST /edit {side, editText}`, `POST /migrate {side, index,
//! withDeps}` and `POST /merge {side}`. Every mutation is saved to the image
//! files before the new state is returned. Requests are handled one at a time.

use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tvc_core::{Error, MergePolicy, Side};

use crate::store::{StoreError, Workspace};
use crate::view::{self, MigrationView, StateView};

type Shared = Arc<Mutex<Workspace>>;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EditRequest {
    pub side: Side,
    pub edit_text: String,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MigrateRequest {
    pub side: Side,
    pub index: usize,
    #[serde(default)]
    pub with_deps: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeRequest {
    pub side: Side,
}

#[derive(Debug, Serialize)]
pub struct Reply {
    #[serde(flatten)]
    pub state: StateView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub migration: Option<MigrationView>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ErrorBody {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocking: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocking_edit: Option<String>,
}

pub struct ApiError(StatusCode, ErrorBody);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn bad_request(error: &'static str, message: String) -> ApiError {
    ApiError(
        StatusCode::BAD_REQUEST,
        ErrorBody {
            error,
            message,
            blocking: None,
            blocking_edit: None,
        },
    )
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::Engine(Error::Dependency {
                blocking,
                blocking_edit,
                ..
            }) => ApiError(
                StatusCode::CONFLICT,
                ErrorBody {
                    error: "dependency",
                    message,
                    blocking: Some(blocking),
                    blocking_edit: Some(tvc_core::syntax::print_short(&blocking_edit)),
                },
            ),
            StoreError::Engine(Error::InvalidEdit { .. }) => bad_request("invalid-edit", message),
            StoreError::Engine(Error::IdNotRecordable) => bad_request("not-recordable", message),
            StoreError::Engine(Error::IndexOutOfRange { .. }) => bad_request("out-of-range", message),
            StoreError::Engine(_) => bad_request("engine", message),
            StoreError::Parse { .. } => bad_request("parse", message),
            StoreError::PrefixMismatch { .. } | StoreError::PrefixTooLong { .. } => bad_request("prefix", message),
            StoreError::Image(_) | StoreError::Exists(_) => bad_request("image", message),
        }
    }
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| bad_request("request", e.to_string()))
}

fn reply(ws: &Workspace, migration: Option<MigrationView>) -> Result<Json<Reply>, ApiError> {
    let pair = ws.pair()?;
    let state = view::state(&pair).map_err(StoreError::from)?;
    Ok(Json(Reply { state, migration }))
}

fn lock(shared: &Shared) -> std::sync::MutexGuard<'_, Workspace> {
    shared.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

async fn get_state(State(shared): State<Shared>) -> Result<Json<Reply>, ApiError> {
    reply(&lock(&shared), None)
}

async fn post_edit(State(shared): State<Shared>, bytes: Bytes) -> Result<Json<Reply>, ApiError> {
    let req: EditRequest = body(&bytes)?;
    let mut ws = lock(&shared);
    ws.edit(req.side, &req.edit_text)?;
    reply(&ws, None)
}

async fn post_migrate(State(shared): State<Shared>, bytes: Bytes) -> Result<Json<Reply>, ApiError> {
    let req: MigrateRequest = body(&bytes)?;
    let mut ws = lock(&shared);
    let report = ws.migrate(req.side, req.index, req.with_deps)?;
    reply(&ws, Some(MigrationView::from(&report)))
}

async fn post_merge(State(shared): State<Shared>, bytes: Bytes) -> Result<Json<Reply>, ApiError> {
    let req: MergeRequest = body(&bytes)?;
    let mut ws = lock(&shared);
    let report = ws.merge(req.side, MergePolicy::Historical)?;
    reply(&ws, Some(MigrationView::from(&report)))
}

pub fn router(ws: Workspace) -> Router {
    Router::new()
        .route("/state", get(get_state))
        .route("/edit", post(post_edit))
        .route("/migrate", post(post_migrate))
        .route("/merge", post(post_merge))
        .with_state(Arc::new(Mutex::new(ws)))
}

pub async fn serve(ws: Workspace, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(ws)).await
}
