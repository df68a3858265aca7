mod support;

use std::sync::OnceLock;

use reqwest::StatusCode;
use sciprose::config::ServiceConfig;
use sciprose::server::{self, AnalyzeResponse, AppState, Health, Models, RunningServer, ScoreResponse, SectionsResponse};
use sciprose_core::Model;
use serde_json::{json, Value};

fn models() -> &'static (Model, Model) {
    static MODELS: OnceLock<(Model, Model)> = OnceLock::new();
    MODELS.get_or_init(|| support::small_models(21))
}

async fn serve(config: ServiceConfig) -> (RunningServer, String) {
    let (score, sections) = models().clone();
    let server = server::start(support::state_with(config, score, sections)).await.unwrap();
    let base = format!("http://{}", server.addr);
    (server, base)
}

async fn post(base: &str, path: &str, body: Value) -> (StatusCode, Value) {
    let r = reqwest::Client::new().post(format!("{base}{path}")).json(&body).send().await.unwrap();
    let status = r.status();
    (status, r.json().await.unwrap())
}

fn paraphrasing(stub: std::net::SocketAddr, route: &str) -> ServiceConfig {
    ServiceConfig {
        paraphraser_endpoint: Some(format!("http://{stub}/{route}")),
        paraphrase_threshold: 1.1,
        paraphrase_deadline_ms: 1000,
        ..ServiceConfig::default()
    }
}

#[tokio::test]
async fn healthz_reports_model_checksums() {
    let (server, base) = serve(ServiceConfig::default()).await;
    let health: Health = reqwest::get(format!("{base}/healthz")).await.unwrap().json().await.unwrap();
    assert_eq!(health.status, "ok");
    assert_eq!(health.models.score.as_deref(), Some(models().0.checksum().as_str()));
    assert_eq!(health.models.sections.as_deref(), Some(models().1.checksum().as_str()));
    server.stop().await.unwrap();
}

#[tokio::test]
async fn score_separates_the_two_registers() {
    let (server, base) = serve(ServiceConfig::default()).await;
    let sci = support::sentences(1, 900, true).remove(0);
    let col = support::sentences(1, 901, false).remove(0);
    let (status, body) = post(&base, "/v1/score", json!({"sentences": [sci, col]})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let r: ScoreResponse = serde_json::from_value(body).unwrap();
    assert_eq!(r.scores.len(), 2);
    assert!(r.scores[0] > r.scores[1], "{:?}", r.scores);
    server.stop().await.unwrap();
}

#[tokio::test]
async fn request_validation() {
    let config = ServiceConfig { max_sentences: 3, ..ServiceConfig::default() };
    let (server, base) = serve(config).await;
    let cases = [
        ("/v1/score", json!({"sentences": []})),
        ("/v1/score", json!({"sentences": ["A.", "B.", "C.", "D."]})),
        ("/v1/score", json!({"text": "wrong field"})),
        ("/v1/sections", json!({"sentences": ["We conclude."], "context": 4})),
        ("/v1/sections", json!({"sentences": ["We conclude."], "lambda": 1.0})),
        ("/v1/analyze", json!({"document": "One sentence here.", "options": {"context": 0}})),
    ];
    for (path, body) in cases {
        let (status, reply) = post(&base, path, body.clone()).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{path} {body}: {reply}");
        assert_eq!(reply["error"]["code"], "bad_request");
        assert!(reply["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let r = reqwest::Client::new()
        .post(format!("{base}/v1/score"))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    server.stop().await.unwrap();
}

#[tokio::test]
async fn oversized_body_is_rejected() {
    let config = ServiceConfig { max_body_bytes: 256, ..ServiceConfig::default() };
    let (server, base) = serve(config).await;
    let (status, reply) = post(&base, "/v1/analyze", json!({"document": "Word ".repeat(200)})).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE, "{reply}");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn missing_models_give_503() {
    let config = ServiceConfig { listen: "127.0.0.1:0".parse().unwrap(), ..ServiceConfig::default() };
    let state = std::sync::Arc::new(AppState::with_models(config, Models::new(None, None).unwrap()).unwrap());
    let server = server::start(state).await.unwrap();
    let base = format!("http://{}", server.addr);
    for path in ["/v1/score", "/v1/sections"] {
        let (status, reply) = post(&base, path, json!({"sentences": ["We study graphs."]})).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE, "{path}: {reply}");
        assert_eq!(reply["error"]["code"], "model_unavailable");
    }
    server.stop().await.unwrap();
}

#[tokio::test]
async fn paraphrase_without_endpoint_is_422() {
    let (server, base) = serve(ServiceConfig::default()).await;
    let (status, reply) = post(&base, "/v1/analyze", json!({"document": "We study graphs.", "options": {"paraphrase": true}})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{reply}");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn sections_context_width_changes_inputs() {
    let (server, base) = serve(ServiceConfig::default()).await;
    let sentences = ["We propose a new estimator for sparse graphs.", "Results show a clear improvement.", "Future work remains."];
    let (s1, r1) = post(&base, "/v1/sections", json!({"sentences": sentences, "context": 1})).await;
    let (s3, r3) = post(&base, "/v1/sections", json!({"sentences": sentences, "context": 3})).await;
    assert_eq!((s1, s3), (StatusCode::OK, StatusCode::OK));
    let r1: SectionsResponse = serde_json::from_value(r1).unwrap();
    let r3: SectionsResponse = serde_json::from_value(r3).unwrap();
    assert_eq!(r1.labels.len(), 3);
    assert!(r1.probabilities.iter().all(|p| p.len() == 7 && p.iter().all(|x| (0.0..=1.0).contains(x))));
    assert_ne!(r1.probabilities, r3.probabilities);
    server.stop().await.unwrap();
}

#[tokio::test]
async fn analyze_reports_filters_and_is_deterministic() {
    let (server, base) = serve(ServiceConfig::default()).await;
    let doc = "We propose a robust estimator of variance. too short. Our results hold for every sample size considered";
    let (status, a) = post(&base, "/v1/analyze", json!({"document": doc})).await;
    assert_eq!(status, StatusCode::OK, "{a}");
    let (_, b) = post(&base, "/v1/analyze", json!({"document": doc})).await;
    assert_eq!(a, b);
    let r: AnalyzeResponse = serde_json::from_value(a).unwrap();
    let statuses: Vec<&str> = r.results.iter().map(|x| x.filter_status.as_str()).collect();
    assert_eq!(statuses, ["Accept", "TooShort", "BadLast"]);
    assert!(r.results[0].score.is_some() && r.results[0].sections.is_some());
    assert!(r.results[1].score.is_none() && r.results[1].sections.is_none());
    let (_, c) = post(&base, "/v1/analyze", json!({"document": doc, "options": {"request_id": "fixed"}})).await;
    assert_eq!(c["request_id"], "fixed");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn latex_documents_are_normalized() {
    let (server, base) = serve(ServiceConfig::default()).await;
    let doc = r"\section{Method} We minimize $f(x)$ as shown in Figure~\ref{fig:a}.";
    let (status, reply) = post(&base, "/v1/analyze", json!({"document": doc, "options": {"latex": true}})).await;
    assert_eq!(status, StatusCode::OK, "{reply}");
    let text = reply["results"][0]["text"].as_str().unwrap();
    assert!(text.contains("<equation>") && text.contains("<reference>"), "{text}");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn paraphraser_outcomes() {
    let stub = support::stub_paraphraser().await;
    let doc = "We propose a robust estimator of variance.";
    for (route, paraphrase, error) in [
        ("echo", Some(doc.to_string()), None),
        ("upper", Some(doc.to_uppercase()), None),
        ("empty", None, Some("empty_paraphrase")),
        ("fail", None, Some("upstream_status")),
        ("garbage", None, Some("malformed_response")),
        ("missing", None, Some("upstream_status")),
    ] {
        let (server, base) = serve(paraphrasing(stub, route)).await;
        let (status, reply) = post(&base, "/v1/analyze", json!({"document": doc, "options": {"paraphrase": true}})).await;
        assert_eq!(status, StatusCode::OK, "{route}: {reply}");
        let r: AnalyzeResponse = serde_json::from_value(reply).unwrap();
        assert_eq!(r.results[0].paraphrase, paraphrase, "{route}");
        assert_eq!(r.results[0].paraphrase_error.as_deref(), error, "{route}");
        assert!(r.results[0].paraphrase_latency_ms.is_some(), "{route}");
        server.stop().await.unwrap();
    }
}

#[tokio::test]
async fn unreachable_paraphraser() {
    let free = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let (server, base) = serve(paraphrasing(free, "echo")).await;
    let (status, reply) =
        post(&base, "/v1/analyze", json!({"document": "We propose a robust estimator.", "options": {"paraphrase": true}})).await;
    assert_eq!(status, StatusCode::OK, "{reply}");
    assert_eq!(reply["results"][0]["paraphrase_error"], "unreachable");
    server.stop().await.unwrap();
}

#[tokio::test]
async fn only_low_scoring_sentences_are_paraphrased() {
    let stub = support::stub_paraphraser().await;
    let config = ServiceConfig { paraphrase_threshold: 0.5, ..paraphrasing(stub, "echo") };
    let (server, base) = serve(config).await;
    let sci = support::sentences(1, 910, true).remove(0);
    let col = support::sentences(1, 911, false).remove(0);
    let doc = format!("{sci} {col}");
    let (_, reply) = post(&base, "/v1/analyze", json!({"document": doc, "options": {"paraphrase": true}})).await;
    let r: AnalyzeResponse = serde_json::from_value(reply).unwrap();
    assert_eq!(r.results.len(), 2);
    assert!(r.results[0].paraphrase.is_none(), "{:?}", r.results[0]);
    assert!(r.results[1].paraphrase.is_some(), "{:?}", r.results[1]);
    server.stop().await.unwrap();
}
