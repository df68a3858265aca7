//! Clients for the external paraphraser and masked-language-model endpoints.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use sciprose_core::forge::{OracleError, SubstitutionOracle};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaphraseError {
    DeadlineExceeded,
    EmptyParaphrase,
    UpstreamStatus,
    MalformedResponse,
    Unreachable,
}

impl ParaphraseError {
    pub fn code(self) -> &'static str {
        match self {
            ParaphraseError::DeadlineExceeded => "deadline_exceeded",
            ParaphraseError::EmptyParaphrase => "empty_paraphrase",
            ParaphraseError::UpstreamStatus => "upstream_status",
            ParaphraseError::MalformedResponse => "malformed_response",
            ParaphraseError::Unreachable => "unreachable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParaphraseOutcome {
    pub result: Result<String, ParaphraseError>,
    pub latency_ms: u64,
}

#[derive(Serialize)]
struct ParaphraseRequest<'a> {
    sentence: &'a str,
}

#[derive(Deserialize)]
struct ParaphraseResponse {
    paraphrase: String,
}

/// Forwards `{sentence}` and expects `{paraphrase}` back. Each call, including
/// the wait for an in-flight slot, is bounded by the deadline.
#[derive(Debug, Clone)]
pub struct Paraphraser {
    client: reqwest::Client,
    endpoint: String,
    deadline: Duration,
    permits: Arc<Semaphore>,
}

impl Paraphraser {
    pub fn new(endpoint: impl Into<String>, deadline: Duration, max_in_flight: usize) -> Self {
        Paraphraser {
            client: reqwest::Client::new(),
            endpoint: endpoint.into(),
            deadline,
            permits: Arc::new(Semaphore::new(max_in_flight.max(1))),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub async fn paraphrase(&self, sentence: &str) -> ParaphraseOutcome {
        let start = Instant::now();
        let result = match tokio::time::timeout(self.deadline, self.call(sentence)).await {
            Ok(r) => r,
            Err(_) => Err(ParaphraseError::DeadlineExceeded),
        };
        ParaphraseOutcome { result, latency_ms: start.elapsed().as_millis() as u64 }
    }

    async fn call(&self, sentence: &str) -> Result<String, ParaphraseError> {
        let _permit = self.permits.acquire().await.map_err(|_| ParaphraseError::Unreachable)?;
        let response = self
            .client
            .post(&self.endpoint)
            .json(&ParaphraseRequest { sentence })
            .send()
            .await
            .map_err(|e| if e.is_timeout() { ParaphraseError::DeadlineExceeded } else { ParaphraseError::Unreachable })?;
        if !response.status().is_success() {
            return Err(ParaphraseError::UpstreamStatus);
        }
        let body = response.bytes().await.map_err(|_| ParaphraseError::MalformedResponse)?;
        let parsed: ParaphraseResponse = serde_json::from_slice(&body).map_err(|_| ParaphraseError::MalformedResponse)?;
        let text = parsed.paraphrase.trim();
        if text.is_empty() {
            return Err(ParaphraseError::EmptyParaphrase);
        }
        Ok(text.to_string())
    }
}

#[derive(Serialize)]
struct MaskRequest<'a> {
    left: &'a [String],
    right: &'a [String],
}

#[derive(Deserialize)]
struct MaskResponse {
    word: String,
}

/// Substitution oracle backed by an HTTP endpoint taking `{left, right}`
/// word lists and answering `{word}`. Blocking; use outside async code.
pub struct EndpointOracle {
    client: reqwest::blocking::Client,
    endpoint: String,
}

impl EndpointOracle {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> anyhow::Result<Self> {
        let client = reqwest::blocking::Client::builder().timeout(timeout).build()?;
        Ok(EndpointOracle { client, endpoint: endpoint.into() })
    }
}

impl SubstitutionOracle for EndpointOracle {
    fn propose(&mut self, left: &[String], right: &[String], _rng: &mut ChaCha8Rng) -> Result<String, OracleError> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(&MaskRequest { left, right })
            .send()
            .map_err(|e| OracleError(format!("{}: {e}", self.endpoint)))?;
        if !response.status().is_success() {
            return Err(OracleError(format!("{} answered {}", self.endpoint, response.status())));
        }
        let parsed: MaskResponse = response.json().map_err(|e| OracleError(format!("malformed reply: {e}")))?;
        let word = parsed.word.trim();
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(OracleError(format!("unusable word {:?}", parsed.word)));
        }
        Ok(word.to_string())
    }
}
