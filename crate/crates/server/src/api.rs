use std::str::FromStr;

use axum::extract::multipart::Multipart;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use cpm_core::comparison::{comparison_view, highlight_classes, ComparisonResult, ComparisonView, ModelSlice, Side};
use cpm_core::event_log::{xes_string, CsvMapping};
use cpm_core::export::{export_comparison_report, export_dot, export_variants_csv};
use cpm_core::filtering::{apply_filter, describe_filter_options, FilterOptions};
use cpm_core::{FilterSpec, Metric};
use serde::Deserialize;

use crate::error::ApiError;
use crate::session::{ActivePair, ComparisonSession};
use crate::store::LogStoreEntry;
use crate::AppState;

type ApiResult<T> = Result<T, ApiError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|r| ApiError::new(r.status(), "invalid_body", r.body_text()))
}

fn query<T>(params: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    params
        .map(|Query(v)| v)
        .map_err(|r| ApiError::new(r.status(), "invalid_query", r.body_text()))
}

fn parse_metric(metric: Option<&str>) -> ApiResult<Metric> {
    match metric {
        None => Ok(Metric::Frequency),
        Some(m) => Metric::from_str(m).map_err(|e| ApiError::bad_request("invalid_metric", e.to_string())),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))
}

pub async fn upload_log(State(state): State<AppState>, mut multipart: Multipart) -> ApiResult<Response> {
    let mut file: Option<(String, Vec<u8>)> = None;
    let mut mapping: Option<CsvMapping> = None;
    let field_error = |e: axum::extract::multipart::MultipartError| {
        ApiError::new(e.status(), "invalid_upload", e.body_text())
    };
    while let Some(field) = multipart.next_field().await.map_err(field_error)? {
        match field.name() {
            Some("file") => {
                let name = field.file_name().unwrap_or("upload").to_owned();
                let bytes = field.bytes().await.map_err(field_error)?;
                file = Some((name, bytes.to_vec()));
            }
            Some("mapping") => {
                let text = field.text().await.map_err(field_error)?;
                if !text.trim().is_empty() {
                    let parsed = serde_json::from_str(&text)
                        .map_err(|e| ApiError::bad_request("invalid_mapping", e.to_string()))?;
                    mapping = Some(parsed);
                }
            }
            _ => {}
        }
    }
    let (name, bytes) = file.ok_or_else(|| ApiError::bad_request("missing_file", "multipart field \"file\" is required"))?;
    let store = state.logs.clone();
    let ingested = blocking(move || store.ingest(&name, &bytes, mapping)).await??;
    let status = if ingested.created {
        tracing::info!(log_id = %ingested.entry.log_id, file = %ingested.entry.file_name, "ingested upload");
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok((status, Json(ingested.entry)).into_response())
}

pub async fn list_logs(State(state): State<AppState>) -> Json<Vec<LogStoreEntry>> {
    Json(state.logs.entries())
}

pub async fn log_schema(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<FilterOptions>> {
    let log = state.logs.get(&id).ok_or_else(|| ApiError::not_found("log", &id))?;
    Ok(Json(blocking(move || describe_filter_options(&log)).await?))
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub log_id: String,
}

pub async fn create_session(
    State(state): State<AppState>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<ComparisonSession>)> {
    let req = body(payload)?;
    if state.logs.get_entry(&req.log_id).is_none() {
        return Err(ApiError::not_found("log", &req.log_id));
    }
    let session = state.sessions.create(&req.log_id)?;
    Ok((StatusCode::CREATED, Json(session)))
}

fn session_log_id(state: &AppState, id: &str) -> ApiResult<String> {
    let shared = state.sessions.get(id).ok_or_else(|| ApiError::not_found("session", id))?;
    let log_id = shared.lock().expect("session lock").log_id.clone();
    Ok(log_id)
}

pub async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<ComparisonSession>> {
    let shared = state.sessions.get(&id).ok_or_else(|| ApiError::not_found("session", &id))?;
    let session = shared.lock().expect("session lock").clone();
    Ok(Json(session))
}

#[derive(Debug, Deserialize)]
pub struct AddSlice {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub filter: FilterSpec,
}

pub async fn add_slice(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<AddSlice>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<ModelSlice>)> {
    let req = body(payload)?;
    let log_id = session_log_id(&state, &id)?;
    let log = state
        .logs
        .get(&log_id)
        .ok_or_else(|| ApiError::not_found("log", &log_id))?;
    let label = req.label.unwrap_or_default();
    let slice = blocking(move || ModelSlice::build(label, req.filter, &log)).await??;
    let (slice, _) = state
        .sessions
        .update(&id, |s| {
            let mut slice = slice;
            if slice.label.is_empty() {
                slice.label = format!("Model {}", s.slices.len() + 1);
            }
            s.slices.push(slice.clone());
            slice
        })
        .ok_or_else(|| ApiError::not_found("session", &id))??;
    Ok((StatusCode::CREATED, Json(slice)))
}

pub async fn put_active_pair(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<ActivePair>, JsonRejection>,
) -> ApiResult<Json<ComparisonSession>> {
    let pair = body(payload)?;
    let (outcome, session) = state
        .sessions
        .update(&id, |s| s.activate(pair).map(|_| ()))
        .ok_or_else(|| ApiError::not_found("session", &id))??;
    outcome.map_err(|e| ApiError::conflict("invalid_active_pair", e.to_string()))?;
    Ok(Json(session))
}

fn active_result(state: &AppState, id: &str) -> ApiResult<(String, ComparisonResult)> {
    let shared = state.sessions.get(id).ok_or_else(|| ApiError::not_found("session", id))?;
    let session = shared.lock().expect("session lock");
    let result = session
        .result
        .clone()
        .ok_or_else(|| ApiError::conflict("no_active_pair", "session has no active pair"))?;
    Ok((session.log_id.clone(), result))
}

#[derive(Debug, Deserialize)]
pub struct MetricQuery {
    pub metric: Option<String>,
}

pub async fn get_comparison(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<MetricQuery>, QueryRejection>,
) -> ApiResult<Json<ComparisonView>> {
    let metric = parse_metric(query(params)?.metric.as_deref())?;
    let (_, result) = active_result(&state, &id)?;
    Ok(Json(comparison_view(&result, metric)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Report,
    Dot(Side),
    Variants(Side),
    Log(Side),
}

impl FromStr for ExportKind {
    type Err = ApiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "report" => ExportKind::Report,
            "dot_left" => ExportKind::Dot(Side::Left),
            "dot_right" => ExportKind::Dot(Side::Right),
            "variants_left" => ExportKind::Variants(Side::Left),
            "variants_right" => ExportKind::Variants(Side::Right),
            "log_left" => ExportKind::Log(Side::Left),
            "log_right" => ExportKind::Log(Side::Right),
            other => return Err(ApiError::bad_request("invalid_export_kind", format!("unknown export kind {other:?}"))),
        })
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub kind: String,
    pub metric: Option<String>,
}

pub async fn export(
    State(state): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<ExportQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let params = query(params)?;
    let kind: ExportKind = params.kind.parse()?;
    let metric = parse_metric(params.metric.as_deref())?;
    let (log_id, result) = active_result(&state, &id)?;
    let log = state.logs.get(&log_id).ok_or_else(|| ApiError::not_found("log", &log_id))?;

    let (content_type, file_name, text) = blocking(move || -> ApiResult<_> {
        Ok(match kind {
            ExportKind::Report => (
                "text/html; charset=utf-8",
                "comparison-report.html".to_owned(),
                export_comparison_report(&result, metric),
            ),
            ExportKind::Dot(side) => {
                let classes = highlight_classes(&result, side);
                let dot = export_dot(&result.slice(side).dfg, metric, Some(&classes))
                    .map_err(|e| ApiError::internal(e.to_string()))?;
                ("text/vnd.graphviz; charset=utf-8", format!("{}.dot", side_name(side)), dot)
            }
            ExportKind::Variants(side) => {
                let filtered = apply_filter(&log, &result.slice(side).filter)?;
                (
                    "text/csv; charset=utf-8",
                    format!("{}-variants.csv", side_name(side)),
                    export_variants_csv(&filtered),
                )
            }
            ExportKind::Log(side) => {
                let filtered = apply_filter(&log, &result.slice(side).filter)?;
                ("application/xml", format!("{}.xes", side_name(side)), xes_string(&filtered))
            }
        })
    })
    .await??;

    let disposition = format!("attachment; filename=\"{file_name}\"");
    Ok((
        [(header::CONTENT_TYPE, content_type.to_owned()), (header::CONTENT_DISPOSITION, disposition)],
        text,
    )
        .into_response())
}

pub async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}
