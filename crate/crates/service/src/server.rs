//! The `/v1` JSON API.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use anyhow::{Context, Result};
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use sciprose_core::corpus::{filter_sentence, normalize_latex, paper_seed, split_sentences, FilterVerdict};
use sciprose_core::forge::{assemble_context, ContextMode};
use sciprose_core::mlp::Head;
use sciprose_core::Model;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::task::JoinSet;

use crate::config::ServiceConfig;
use crate::proxy::Paraphraser;

/// Loaded models; replaced as a whole on reload, never mutated.
#[derive(Debug, Default)]
pub struct Models {
    pub score: Option<Model>,
    pub sections: Option<Model>,
    pub checksums: ModelChecksums,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelChecksums {
    pub score: Option<String>,
    pub sections: Option<String>,
}

impl Models {
    pub fn new(score: Option<Model>, sections: Option<Model>) -> Result<Self> {
        if let Some(m) = &score {
            anyhow::ensure!(m.head() == Head::Regression, "score model must have a regression head");
        }
        if let Some(m) = &sections {
            anyhow::ensure!(m.head() == Head::Multilabel, "section model must have a multilabel head");
        }
        let checksums = ModelChecksums {
            score: score.as_ref().map(Model::checksum),
            sections: sections.as_ref().map(Model::checksum),
        };
        Ok(Models { score, sections, checksums })
    }

    pub fn load(config: &ServiceConfig) -> Result<Self> {
        let load = |p: &std::path::Path| Model::load(p).with_context(|| format!("loading model {}", p.display()));
        let score = config.score_model.as_deref().map(load).transpose()?;
        let sections = config.section_model.as_deref().map(load).transpose()?;
        Self::new(score, sections)
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    models: RwLock<Arc<Models>>,
    paraphraser: Option<Paraphraser>,
    names: Vec<String>,
}

impl AppState {
    pub fn from_config(config: ServiceConfig) -> Result<Self> {
        let models = Models::load(&config)?;
        Self::with_models(config, models)
    }

    pub fn with_models(config: ServiceConfig, models: Models) -> Result<Self> {
        config.validate()?;
        let names = match &config.names_file {
            Some(p) => crate::io::read_lines(p)?,
            None => Vec::new(),
        };
        let paraphraser = config.paraphraser_endpoint.as_ref().map(|url| {
            Paraphraser::new(url.clone(), Duration::from_millis(config.paraphrase_deadline_ms), config.max_in_flight)
        });
        Ok(AppState { config, models: RwLock::new(Arc::new(models)), paraphraser, names })
    }

    pub fn models(&self) -> Arc<Models> {
        self.models.read().expect("model lock poisoned").clone()
    }

    /// Loads the configured model files again and swaps them in. On error the
    /// current models stay.
    pub fn reload(&self) -> Result<()> {
        let fresh = Arc::new(Models::load(&self.config)?);
        *self.models.write().expect("model lock poisoned") = fresh;
        Ok(())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            return ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "body_too_large", r.body_text());
        }
        ApiError::bad_request(r.body_text())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: ErrorDetail { code: self.code, message: &self.message } };
        (self.status, Json(body)).into_response()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
    pub models: ModelChecksums,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionsRequest {
    pub sentences: Vec<String>,
    #[serde(default)]
    pub context: Option<u8>,
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionsResponse {
    pub labels: Vec<Vec<String>>,
    pub probabilities: Vec<Vec<f64>>,
    pub models: ModelChecksums,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyzeOptions {
    pub paraphrase: bool,
    pub context: Option<u8>,
    pub lambda: Option<f64>,
    /// Treat the document as LaTeX source and normalize it first.
    pub latex: bool,
    pub request_id: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeRequest {
    pub document: String,
    #[serde(default)]
    pub options: AnalyzeOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResult {
    pub index: usize,
    pub text: String,
    /// `Accept` or the name of the first failed filter.
    pub filter_status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraphrase: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraphrase_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraphrase_latency_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub request_id: String,
    pub results: Vec<AnalyzeResult>,
    pub models: ModelChecksums,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub models: ModelChecksums,
}

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_body_bytes;
    Router::new()
        .route("/healthz", get(healthz))
        .route("/v1/score", post(score))
        .route("/v1/sections", post(sections))
        .route("/v1/analyze", post(analyze))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health { status: "ok".into(), models: state.models().checksums.clone() })
}

fn check_count(state: &AppState, n: usize) -> Result<(), ApiError> {
    if n == 0 {
        return Err(ApiError::bad_request("no sentences given"));
    }
    if n > state.config.max_sentences {
        return Err(ApiError::bad_request(format!(
            "{n} sentences exceed the limit of {}",
            state.config.max_sentences
        )));
    }
    Ok(())
}

fn context_mode(state: &AppState, requested: Option<u8>) -> Result<ContextMode, ApiError> {
    match requested {
        None => Ok(state.config.default_context()),
        Some(m) => ContextMode::try_from(m).map_err(ApiError::bad_request),
    }
}

fn threshold(state: &AppState, requested: Option<f64>) -> Result<f64, ApiError> {
    let lambda = requested.unwrap_or(state.config.lambda);
    if lambda > 0.0 && lambda < 1.0 {
        Ok(lambda)
    } else {
        Err(ApiError::bad_request(format!("lambda must lie in (0, 1), got {lambda}")))
    }
}

fn unconfigured(what: &str) -> ApiError {
    ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "model_unavailable", format!("no {what} model is configured"))
}

async fn score(
    State(state): State<Arc<AppState>>,
    body: Result<Json<ScoreRequest>, JsonRejection>,
) -> Result<Json<ScoreResponse>, ApiError> {
    let Json(req) = body?;
    check_count(&state, req.sentences.len())?;
    let models = state.models();
    let model = models.score.as_ref().ok_or_else(|| unconfigured("score"))?;
    let scores = req
        .sentences
        .iter()
        .map(|s| model.predict_score(s).expect("head checked at load"))
        .collect();
    Ok(Json(ScoreResponse { scores, models: models.checksums.clone() }))
}

fn classify_window(model: &Model, sentences: &[&str], mode: ContextMode, lambda: f64, max_words: usize) -> Vec<(Vec<String>, Vec<f64>)> {
    (0..sentences.len())
        .map(|i| {
            let context = assemble_context(sentences, i, mode, max_words);
            let p = model.predict_sections(&context, lambda).expect("head checked at load");
            (p.labels.iter().map(|c| c.as_str().to_string()).collect(), p.probabilities)
        })
        .collect()
}

async fn sections(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SectionsRequest>, JsonRejection>,
) -> Result<Json<SectionsResponse>, ApiError> {
    let Json(req) = body?;
    check_count(&state, req.sentences.len())?;
    let mode = context_mode(&state, req.context)?;
    let lambda = threshold(&state, req.lambda)?;
    let models = state.models();
    let model = models.sections.as_ref().ok_or_else(|| unconfigured("section"))?;
    let texts: Vec<&str> = req.sentences.iter().map(String::as_str).collect();
    let (labels, probabilities) =
        classify_window(model, &texts, mode, lambda, state.config.context_max_words).into_iter().unzip();
    Ok(Json(SectionsResponse { labels, probabilities, models: models.checksums.clone() }))
}

fn request_seed(request_id: &str) -> u64 {
    paper_seed(0, request_id)
}

fn default_request_id(document: &str) -> String {
    let digest = Sha256::digest(document.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

async fn analyze(
    State(state): State<Arc<AppState>>,
    body: Result<Json<AnalyzeRequest>, JsonRejection>,
) -> Result<Json<AnalyzeResponse>, ApiError> {
    let Json(req) = body?;
    analyze_document(&state, req).await.map(Json)
}

/// Split, filter, score, classify and optionally paraphrase a document.
/// Results follow sentence order; rejected sentences are kept with their
/// filter status and carry no model output.
pub async fn analyze_document(state: &AppState, req: AnalyzeRequest) -> Result<AnalyzeResponse, ApiError> {
    let opts = req.options;
    if opts.paraphrase && state.paraphraser.is_none() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "paraphraser_unconfigured",
            "paraphrasing was requested but no paraphraser endpoint is configured",
        ));
    }
    let mode = context_mode(state, opts.context)?;
    let lambda = threshold(state, opts.lambda)?;
    let request_id = opts.request_id.clone().unwrap_or_else(|| default_request_id(&req.document));
    let text = if opts.latex {
        normalize_latex(&req.document, &state.names, request_seed(&request_id)).text
    } else {
        req.document
    };
    let sentences = split_sentences(&text);
    if sentences.len() > state.config.max_sentences {
        return Err(ApiError::bad_request(format!(
            "document has {} sentences, the limit is {}",
            sentences.len(),
            state.config.max_sentences
        )));
    }
    let models = state.models();
    let mut results: Vec<AnalyzeResult> = sentences
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let filter_status = match filter_sentence(s) {
                FilterVerdict::Accept => "Accept".to_string(),
                FilterVerdict::Reject(r) => r.as_str().to_string(),
            };
            AnalyzeResult {
                index,
                text: s.clone(),
                filter_status,
                score: None,
                sections: None,
                probabilities: None,
                paraphrase: None,
                paraphrase_error: None,
                paraphrase_latency_ms: None,
            }
        })
        .collect();
    let accepted: Vec<usize> = results.iter().filter(|r| r.filter_status == "Accept").map(|r| r.index).collect();
    if let Some(model) = &models.score {
        for &i in &accepted {
            results[i].score = Some(model.predict_score(&results[i].text).expect("head checked at load"));
        }
    }
    if let Some(model) = &models.sections {
        let texts: Vec<&str> = accepted.iter().map(|&i| sentences[i].as_str()).collect();
        let predictions = classify_window(model, &texts, mode, lambda, state.config.context_max_words);
        for (&i, (labels, probs)) in accepted.iter().zip(predictions) {
            results[i].sections = Some(labels);
            results[i].probabilities = Some(probs);
        }
    }
    if opts.paraphrase {
        let paraphraser = state.paraphraser.clone().expect("checked above");
        let limit = state.config.paraphrase_threshold;
        let mut calls = JoinSet::new();
        for &i in &accepted {
            if results[i].score.is_some_and(|s| s >= limit) {
                continue;
            }
            let p = paraphraser.clone();
            let sentence = results[i].text.clone();
            calls.spawn(async move { (i, p.paraphrase(&sentence).await) });
        }
        let mut outcomes = BTreeMap::new();
        while let Some(joined) = calls.join_next().await {
            let (i, outcome) = joined.map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
            outcomes.insert(i, outcome);
        }
        for (i, outcome) in outcomes {
            results[i].paraphrase_latency_ms = Some(outcome.latency_ms);
            match outcome.result {
                Ok(p) => results[i].paraphrase = Some(p),
                Err(e) => results[i].paraphrase_error = Some(e.code().to_string()),
            }
        }
    }
    Ok(AnalyzeResponse { request_id, results, models: models.checksums.clone() })
}

/// A server bound to a port and running on the current runtime.
pub struct RunningServer {
    pub addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    handle: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl RunningServer {
    pub async fn stop(mut self) -> Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.handle.await??;
        Ok(())
    }
}

pub async fn start(state: Arc<AppState>) -> Result<RunningServer> {
    let listener = tokio::net::TcpListener::bind(state.config.listen)
        .await
        .with_context(|| format!("binding {}", state.config.listen))?;
    let addr = listener.local_addr()?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let app = router(state);
    let handle = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(RunningServer { addr, shutdown: Some(tx), handle })
}

/// Serves until interrupted.
pub async fn run(state: Arc<AppState>) -> Result<()> {
    let server = start(state).await?;
    log::info!("listening on {}", server.addr);
    tokio::signal::ctrl_c().await?;
    server.stop().await
}
