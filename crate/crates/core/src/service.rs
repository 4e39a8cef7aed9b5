//! HTTP/JSON API behind the interactive threshold tuner.
//!
//! Images live in memory keyed by the SHA-256 of their encoded bytes, and
//! detection results are cached per (image, canonical config) pair.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tower_http::cors::CorsLayer;

use crate::pipeline::detect;
use crate::raster::{decode_image, encode_png, GrayImage};
use crate::report::{config_from_value, result_json, ConfigError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub id: String,
    pub name: String,
    pub width: u32,
    pub height: u32,
}

struct StoredImage {
    entry: ImageEntry,
    image: Arc<GrayImage>,
}

#[derive(Default)]
pub struct AppState {
    images: RwLock<HashMap<String, StoredImage>>,
    cache: Mutex<HashMap<(String, String), Arc<String>>>,
}

pub fn content_id(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Decodes and stores `bytes`; returns the entry and whether it was new.
    pub fn add_image(&self, name: &str, bytes: &[u8]) -> Result<(ImageEntry, bool), crate::raster::RasterError> {
        let id = content_id(bytes);
        if let Some(existing) = self.images.read().expect("image store poisoned").get(&id) {
            return Ok((existing.entry.clone(), false));
        }
        let image = decode_image(bytes)?;
        let entry = ImageEntry { id: id.clone(), name: name.to_string(), width: image.width(), height: image.height() };
        let mut images = self.images.write().expect("image store poisoned");
        if let Some(existing) = images.get(&id) {
            return Ok((existing.entry.clone(), false));
        }
        images.insert(id, StoredImage { entry: entry.clone(), image: Arc::new(image) });
        Ok((entry, true))
    }

    /// Loads every decodable file in `dir`; undecodable files are skipped with a warning.
    pub fn load_dir(&self, dir: &Path) -> std::io::Result<usize> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        let mut loaded = 0;
        for path in paths {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            match self.add_image(&name, &std::fs::read(&path)?) {
                Ok(_) => loaded += 1,
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
        Ok(loaded)
    }

    /// Entries ordered by name, then id.
    pub fn list(&self) -> Vec<ImageEntry> {
        let images = self.images.read().expect("image store poisoned");
        let mut entries: Vec<_> = images.values().map(|s| s.entry.clone()).collect();
        entries.sort_by(|a, b| (&a.name, &a.id).cmp(&(&b.name, &b.id)));
        entries
    }

    fn image(&self, id: &str) -> Option<Arc<GrayImage>> {
        self.images.read().expect("image store poisoned").get(id).map(|s| s.image.clone())
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Unsupported(String),
    InvalidConfig(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Unsupported(m) => (StatusCode::UNSUPPORTED_MEDIA_TYPE, m),
            ApiError::InvalidConfig(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(serde_json::json!({ "error": message }))).into_response()
    }
}

async fn healthz() -> &'static str {
    "ok"
}

async fn list_images(State(state): State<Arc<AppState>>) -> Json<Vec<ImageEntry>> {
    Json(state.list())
}

#[derive(Deserialize)]
struct UploadQuery {
    name: Option<String>,
}

async fn upload_image(
    State(state): State<Arc<AppState>>,
    Query(query): Query<UploadQuery>,
    body: Bytes,
) -> Result<(StatusCode, Json<ImageEntry>), ApiError> {
    let name = query.name.unwrap_or_else(|| format!("upload-{}", &content_id(&body)[..12]));
    let (entry, created) = state.add_image(&name, &body).map_err(|e| ApiError::Unsupported(e.to_string()))?;
    Ok((if created { StatusCode::CREATED } else { StatusCode::OK }, Json(entry)))
}

async fn raw_image(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let image = state.image(&id).ok_or_else(|| ApiError::NotFound(format!("unknown image id {id}")))?;
    let png = encode_png(&image).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectRequest {
    image_id: String,
    #[serde(default)]
    config: Option<serde_json::Value>,
}

async fn run_detect(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: DetectRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("bad detect request: {e}")))?;
    let image = state.image(&req.image_id).ok_or_else(|| ApiError::NotFound(format!("unknown image id {}", req.image_id)))?;
    let config = config_from_value(req.config.unwrap_or_else(|| serde_json::json!({}))).map_err(|e| match e {
        ConfigError::Parse(e) => ApiError::InvalidConfig(e.to_string()),
        ConfigError::Invalid(e) => ApiError::InvalidConfig(e.to_string()),
    })?;
    let key = (req.image_id, serde_json::to_string(&config).expect("config serializes"));
    let cached = state.cache.lock().expect("cache poisoned").get(&key).cloned();
    let body = match cached {
        Some(body) => body,
        None => {
            // concurrent misses on the same key compute identical bodies; first insert wins
            let body = tokio::task::spawn_blocking(move || Arc::new(result_json(&detect(&image, &config))))
                .await
                .map_err(|e| ApiError::Internal(e.to_string()))?;
            state.cache.lock().expect("cache poisoned").entry(key).or_insert(body).clone()
        }
    };
    Ok(([(header::CONTENT_TYPE, "application/json")], body.as_str().to_owned()).into_response())
}

async fn log_request(req: Request, next: Next) -> Response {
    let (method, path) = (req.method().clone(), req.uri().path().to_owned());
    let start = Instant::now();
    let response = next.run(req).await;
    tracing::info!("{method} {path} {} {:.1}ms", response.status().as_u16(), start.elapsed().as_secs_f64() * 1e3);
    response
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/images", get(list_images).post(upload_image))
        .route("/images/{id}/raw", get(raw_image))
        .route("/detect", post(run_detect))
        .layer(middleware::from_fn(log_request))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves on an already bound listener until the process is interrupted.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
