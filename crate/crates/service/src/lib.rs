//! HTTP/JSON front end: training, prediction, explanation, what-if, coverage,
//! cycle curves and feedback capture over a persistent model registry.
//!
//! No authentication; the default bind address is loopback.

mod feedback;
mod registry;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use riskweave::api::{self, ApiError, TrainResponse};
use riskweave::cycles::{records_from_csv, FitConfig};
use riskweave::narrate::{Lexicon, TemplateStore};
use riskweave::tabular::{infer_schema, parse_csv, parse_schema_text};
use riskweave::{ModelEnvelope, Narrator, Schema, TrainParams, VerbalMap};
use serde::Serialize;

pub use feedback::{FeedbackAnswers, FeedbackEntry, FeedbackLog, FeedbackRequest, FEEDBACK_SCHEMA_VERSION};
pub use registry::{Registry, Snapshot};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SEED: u64 = 1;
const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    pub bind: SocketAddr,
    pub storage_root: PathBuf,
    pub verbal_map: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
}

impl Config {
    pub fn new(storage_root: impl Into<PathBuf>) -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            storage_root: storage_root.into(),
            verbal_map: None,
            templates: None,
            lexicon: None,
        }
    }
}

fn read_document(path: &std::path::Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| ApiError::new("Io", format!("{}: {e}", path.display())))
}

/// Bundled documents unless the config points at replacements.
pub fn load_narrator(config: &Config) -> Result<Narrator, ApiError> {
    let mut n = Narrator::default();
    if let Some(p) = &config.verbal_map {
        n.map = VerbalMap::from_json(&read_document(p)?)?;
    }
    if let Some(p) = &config.templates {
        n.templates = TemplateStore::from_json(&read_document(p)?)?;
    }
    if let Some(p) = &config.lexicon {
        n.lexicon = Lexicon::from_json(&read_document(p)?)?;
    }
    Ok(n)
}

pub struct AppState {
    pub registry: Registry,
    pub feedback: FeedbackLog,
    pub narrator: Narrator,
}

impl AppState {
    pub fn open(config: &Config) -> Result<Self, ApiError> {
        std::fs::create_dir_all(&config.storage_root)
            .map_err(|e| ApiError::new("StorageError", format!("creating storage root: {e}")))?;
        Ok(Self {
            registry: Registry::open(&config.storage_root)?,
            feedback: FeedbackLog::open(&config.storage_root)?,
            narrator: load_narrator(config)?,
        })
    }
}

pub fn status_for(code: &str) -> StatusCode {
    match code {
        "UnknownModel" => StatusCode::NOT_FOUND,
        "UnknownLabel" | "CycleOutOfRange" | "NotConverged" => StatusCode::UNPROCESSABLE_ENTITY,
        "StorageError" | "Io" | "Internal" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn json_response(status: StatusCode, body: &impl Serialize) -> Response {
    let bytes = serde_json::to_vec(body).expect("response serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn error_response(e: ApiError) -> Response {
    json_response(status_for(&e.code), &e.to_json())
}

fn reply<T: Serialize>(status: StatusCode, result: Result<T, ApiError>) -> Response {
    match result {
        Ok(body) => json_response(status, &body),
        Err(e) => error_response(e),
    }
}

fn parse_body(bytes: &[u8]) -> Result<serde_json::Value, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::new("InvalidJson", e.to_string()))
}

/// Starts from `T::default()` and overrides the keys present in `overrides`.
fn with_defaults<T: Default + Serialize + serde::de::DeserializeOwned>(
    overrides: Option<&serde_json::Value>,
    what: &str,
) -> Result<T, ApiError> {
    let Some(overrides) = overrides.filter(|v| !v.is_null()) else {
        return Ok(T::default());
    };
    let serde_json::Value::Object(extra) = overrides else {
        return Err(ApiError::new("InvalidParams", format!("`{what}` must be an object")));
    };
    let mut merged = serde_json::to_value(T::default()).expect("defaults serialize");
    let target = merged.as_object_mut().expect("defaults are an object");
    for (k, v) in extra {
        if !target.contains_key(k) {
            return Err(ApiError::new("InvalidParams", format!("unknown `{what}` key `{k}`")));
        }
        target.insert(k.clone(), v.clone());
    }
    serde_json::from_value(merged).map_err(|e| ApiError::new("InvalidParams", format!("`{what}`: {e}")))
}

/// A schema given as a JSON object or in the plain-text schema format.
fn parse_schema(value: &serde_json::Value) -> Result<Schema, ApiError> {
    match value {
        serde_json::Value::String(text) => Ok(parse_schema_text(text)?),
        serde_json::Value::Object(_) => serde_json::from_value(value.clone())
            .map_err(|e| ApiError::new("InvalidSchema", e.to_string())),
        _ => Err(ApiError::new("InvalidSchema", "`schema` must be an object or schema text")),
    }
}

fn require_csv(body: &serde_json::Value) -> Result<&str, ApiError> {
    body.get("csv")
        .and_then(|v| v.as_str())
        .ok_or_else(|| ApiError::new("MissingField", "`csv` (dataset text) is required"))
}

fn check_keys(body: &serde_json::Value, allowed: &[&str]) -> Result<(), ApiError> {
    let object = body
        .as_object()
        .ok_or_else(|| ApiError::new("InvalidJson", "request body must be a JSON object"))?;
    match object.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ApiError::new("UnknownField", format!("unexpected field `{k}`"))),
        None => Ok(()),
    }
}

fn train_tree_request(body: &serde_json::Value) -> Result<ModelEnvelope, ApiError> {
    check_keys(body, &["csv", "schema", "params", "seed", "test_fraction"])?;
    let csv = require_csv(body)?;
    let schema = match body.get("schema").filter(|v| !v.is_null()) {
        Some(s) => parse_schema(s)?,
        None => infer_schema(csv)?,
    };
    let params: TrainParams = with_defaults(body.get("params"), "params")?;
    let seed = match body.get("seed").filter(|v| !v.is_null()) {
        Some(v) => v.as_u64().ok_or_else(|| ApiError::new("InvalidParams", "`seed` must be a non-negative integer"))?,
        None => DEFAULT_SEED,
    };
    let test_fraction = match body.get("test_fraction").filter(|v| !v.is_null()) {
        Some(v) => v.as_f64().ok_or_else(|| ApiError::new("InvalidParams", "`test_fraction` must be a number"))?,
        None => riskweave::artifact::DEFAULT_TEST_FRACTION,
    };
    let dataset = parse_csv(csv, &schema)?;
    Ok(ModelEnvelope::train_tree(&dataset, params, test_fraction, seed)?)
}

fn fit_cycles_request(body: &serde_json::Value) -> Result<ModelEnvelope, ApiError> {
    check_keys(body, &["csv", "schema", "config"])?;
    let csv = require_csv(body)?;
    let schema = parse_schema(
        body.get("schema")
            .ok_or_else(|| ApiError::new("MissingField", "`schema` is required for cycle data"))?,
    )?;
    let config: FitConfig = with_defaults(body.get("config"), "config")?;
    let records = records_from_csv(csv, &schema)?;
    Ok(ModelEnvelope::fit_cycles(&schema, &records, config)?)
}

async fn create(state: Arc<AppState>, bytes: Bytes, build: fn(&serde_json::Value) -> Result<ModelEnvelope, ApiError>) -> Response {
    let result = tokio::task::spawn_blocking(move || {
        let body = parse_body(&bytes)?;
        let model = build(&body)?;
        let (id, stored) = state.registry.insert(model)?;
        Ok(TrainResponse::new(id, &stored))
    })
    .await
    .unwrap_or_else(|e| Err(ApiError::new("Internal", e.to_string())));
    reply(StatusCode::CREATED, result)
}

async fn create_model(State(state): State<Arc<AppState>>, bytes: Bytes) -> Response {
    create(state, bytes, train_tree_request).await
}

async fn create_cycles(State(state): State<Arc<AppState>>, bytes: Bytes) -> Response {
    create(state, bytes, fit_cycles_request).await
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<ModelEnvelope>, ApiError> {
    state.registry.get(id).ok_or_else(|| ApiError::unknown_model(id))
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    json_response(
        StatusCode::OK,
        &serde_json::json!({ "status": "ok", "models": state.registry.len() }),
    )
}

async fn list_models(State(state): State<Arc<AppState>>) -> Response {
    let models: Vec<TrainResponse> = state
        .registry
        .snapshot()
        .iter()
        .map(|(id, m)| TrainResponse::new(id.clone(), m))
        .collect();
    json_response(StatusCode::OK, &serde_json::json!({ "models": models }))
}

async fn model_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let result = lookup(&state, &id).and_then(|m| api::model_info(&id, &m, &state.narrator));
    reply(StatusCode::OK, result)
}

/// Runs `op` against the model and the parsed request body.
fn with_model<T: Serialize>(
    state: &AppState,
    id: &str,
    bytes: &[u8],
    op: impl FnOnce(&ModelEnvelope, &serde_json::Value) -> Result<T, ApiError>,
) -> Response {
    let result = lookup(state, id).and_then(|m| {
        let body = parse_body(bytes)?;
        op(&m, &body)
    });
    reply(StatusCode::OK, result)
}

async fn predict(State(state): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> Response {
    with_model(&state, &id, &bytes, |m, body| {
        let x = api::parse_instance(m.schema(), body)?;
        api::predict_response(m, &x, &state.narrator)
    })
}

async fn explain(State(state): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> Response {
    with_model(&state, &id, &bytes, |m, body| {
        let x = api::parse_instance(m.schema(), body)?;
        api::explain_response(m, &x, &state.narrator)
    })
}

async fn whatif(State(state): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> Response {
    with_model(&state, &id, &bytes, |m, body| {
        let x = api::parse_instance(m.schema(), body)?;
        let target = api::parse_target_label(body)?;
        api::whatif_response(m, &x, target.as_deref(), &state.narrator)
    })
}

async fn coverage(State(state): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> Response {
    with_model(&state, &id, &bytes, |m, body| {
        let asserted = api::parse_asserted(body)?;
        api::coverage_response(m, &asserted, &state.narrator)
    })
}

async fn cycles_predict(State(state): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> Response {
    with_model(&state, &id, &bytes, |m, body| {
        let x = api::parse_instance(m.schema(), body)?;
        let n = api::parse_n_cycles(body)?;
        api::curve_response(m, &x, n, &state.narrator)
    })
}

async fn post_feedback(State(state): State<Arc<AppState>>, bytes: Bytes) -> Response {
    let result = (|| {
        let request: FeedbackRequest =
            serde_json::from_slice(&bytes).map_err(|e| ApiError::new("InvalidFeedback", e.to_string()))?;
        request.validate()?;
        lookup(&state, &request.model_id)?;
        Ok(FeedbackEntry {
            schema_version: FEEDBACK_SCHEMA_VERSION,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            model_id: request.model_id,
            comment: request.comment,
            answers: request.answers,
            demographics: request.demographics,
        })
    })();
    let result = match result {
        Ok(entry) => {
            let state = state.clone();
            tokio::task::spawn_blocking(move || state.feedback.append(&entry).map(|_| entry))
                .await
                .unwrap_or_else(|e| Err(ApiError::new("Internal", e.to_string())))
        }
        Err(e) => Err(e),
    };
    reply(
        StatusCode::CREATED,
        result.map(|entry| serde_json::json!({ "status": "recorded", "timestamp": entry.timestamp })),
    )
}

async fn not_found() -> Response {
    json_response(StatusCode::NOT_FOUND, &ApiError::new("NotFound", "no such endpoint").to_json())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/models", get(list_models).post(create_model))
        .route("/models/{id}", get(model_info))
        .route("/models/{id}/predict", post(predict))
        .route("/models/{id}/explain", post(explain))
        .route("/models/{id}/whatif", post(whatif))
        .route("/models/{id}/coverage", post(coverage))
        .route("/cycles", post(create_cycles))
        .route("/cycles/{id}", get(model_info))
        .route("/cycles/{id}/predict", post(cycles_predict))
        .route("/cycles/{id}/coverage", post(coverage))
        .route("/feedback", post(post_feedback))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Binds, prints `listening on http://ADDR` to stdout and serves until Ctrl-C.
pub async fn serve(config: Config) -> Result<(), ApiError> {
    let state = Arc::new(AppState::open(&config)?);
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|e| ApiError::new("Io", format!("binding {}: {e}", config.bind)))?;
    let addr = listener.local_addr().map_err(|e| ApiError::new("Io", e.to_string()))?;
    println!("listening on http://{addr}");
    use std::io::Write as _;
    let _ = std::io::stdout().flush();
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ApiError::new("Io", e.to_string()))
}
