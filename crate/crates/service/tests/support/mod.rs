//! Synthetic corpora shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sciprose::config::ServiceConfig;
use sciprose::server::{AppState, Models};
use sciprose_core::forge::{build_context_examples, ContextMode};
use sciprose_core::mlp::{fit, Head};
use sciprose_core::{CanonicalSection, Model, Rank, SentenceRecord, TrainConfig};

const SCI_SUBJECTS: [(&str, bool); 6] = [
    ("We", true),
    ("Our method", false),
    ("The proposed model", false),
    ("This framework", false),
    ("The algorithm", false),
    ("In this work we", true),
];
const SCI_VERBS: [&str; 10] = [
    "propose", "evaluate", "derive", "optimize", "estimate", "formalize", "benchmark", "approximate", "parameterize", "regularize",
];
const SCI_ADJS: [&str; 10] =
    ["stochastic", "asymptotic", "robust", "empirical", "convex", "sparse", "bayesian", "latent", "orthogonal", "spectral"];
const SCI_NOUNS: [&str; 18] = [
    "convergence", "gradient", "estimator", "posterior", "variance", "lemma", "theorem", "objective", "kernel", "manifold",
    "tensor", "baseline", "hyperparameter", "embedding", "benchmark", "distribution", "regression", "entropy",
];
const SCI_TAILS: [&str; 8] = [
    "as shown in <reference>",
    "following <reference>",
    "where <equation> denotes the loss",
    "with <equation>",
    "under mild assumptions",
    "on standard benchmarks",
    "in the limit of large samples",
    "for every <equation> in the domain",
];

const COL_SUBJECTS: [&str; 6] = ["My cat", "Honestly my roommate", "Lol my mom", "My buddy", "Yesterday my sister", "Dude my neighbor"];
const COL_VERBS: [&str; 8] = ["ate", "grabbed", "loved", "hated", "spilled", "bought", "watched", "dropped"];
const COL_ADJS: [&str; 8] = ["awesome", "weird", "cheap", "huge", "tiny", "super", "crazy", "cozy"];
const COL_NOUNS: [&str; 10] = ["pizza", "burrito", "sandwich", "game", "movie", "couch", "coffee", "puppy", "guitar", "sneakers"];
const COL_TAILS: [&str; 8] = ["last night", "at the mall", "haha", "for real", "again today", "before lunch", "with my friends", "so yeah"];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty")
}

pub fn scientific_sentence(rng: &mut ChaCha8Rng) -> String {
    let (subject, plural) = *SCI_SUBJECTS.choose(rng).expect("non-empty");
    let verb = pick(rng, &SCI_VERBS);
    let verb = if plural { verb.to_string() } else { format!("{verb}s") };
    let tail = if rng.gen_bool(0.6) { format!(" {}", pick(rng, &SCI_TAILS)) } else { String::new() };
    format!(
        "{subject} {verb} the {} {} of the {}{tail}.",
        pick(rng, &SCI_ADJS),
        pick(rng, &SCI_NOUNS),
        pick(rng, &SCI_NOUNS)
    )
}

pub fn colloquial_sentence(rng: &mut ChaCha8Rng) -> String {
    let end = pick(rng, &["!", ".", "?", "!!"]);
    format!(
        "{} {} a {} {} {}{end}",
        pick(rng, &COL_SUBJECTS),
        pick(rng, &COL_VERBS),
        pick(rng, &COL_ADJS),
        pick(rng, &COL_NOUNS),
        pick(rng, &COL_TAILS)
    )
}

pub fn sentences(n: usize, seed: u64, scientific: bool) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| if scientific { scientific_sentence(&mut rng) } else { colloquial_sentence(&mut rng) }).collect()
}

const SECTION_WORDS: [[&str; 12]; 7] = [
    ["motivate", "challenge", "contribution", "overview", "important", "problem", "address", "paper", "goal", "novel", "outline", "study"],
    ["prior", "previous", "literature", "existing", "earlier", "survey", "approaches", "compared", "extend", "inspired", "proposed", "authors"],
    ["architecture", "layer", "encoder", "module", "input", "compute", "define", "operator", "parameter", "function", "procedure", "step"],
    ["dataset", "setup", "training", "hardware", "epochs", "split", "configuration", "implementation", "batch", "gpu", "protocol", "runs"],
    ["accuracy", "outperforms", "table", "score", "improvement", "achieves", "higher", "lower", "percent", "best", "metric", "gain"],
    ["interpret", "limitation", "suggests", "because", "behavior", "insight", "explain", "surprising", "might", "implication", "reason", "observe"],
    ["conclude", "summary", "future", "summarize", "finally", "presented", "directions", "plan", "demonstrated", "overall", "work", "closing"],
];
const GENERIC: [&str; 20] = [
    "this", "that", "is", "also", "we", "it", "the", "of", "in", "and", "can", "be", "which", "very", "some", "more", "case", "way",
    "thing", "part",
];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn section_sentence(rng: &mut ChaCha8Rng, section: usize, topical: bool) -> String {
    let mut words: Vec<&str> = (0..rng.gen_range(5..9)).map(|_| pick(rng, &GENERIC)).collect();
    if topical {
        for _ in 0..3 {
            let at = rng.gen_range(1..=words.len());
            words.insert(at, pick(rng, &SECTION_WORDS[section]));
        }
    }
    format!("{} {}.", capitalize(words[0]), words[1..].join(" "))
}

/// Papers with the seven canonical sections in order; roughly half the
/// sentences use section-specific words, the rest only generic ones, so a
/// sentence's neighbours carry information about its section.
pub fn section_corpus(papers: usize, per_section: usize, seed: u64) -> Vec<SentenceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranks = [Rank::AStar, Rank::A, Rank::B, Rank::C];
    let mut out = Vec::new();
    for p in 0..papers {
        let rank = ranks[p % ranks.len()];
        for (section_index, section) in CanonicalSection::ALL.iter().enumerate() {
            for sentence_index in 0..per_section {
                let topical = rng.gen_bool(0.5);
                out.push(SentenceRecord {
                    text: section_sentence(&mut rng, section_index, topical),
                    paper_id: format!("paper{p:03}"),
                    rank,
                    sections: [*section].into_iter().collect(),
                    section_index,
                    sentence_index,
                });
            }
        }
    }
    out
}

pub fn section_targets(labels: &std::collections::BTreeSet<CanonicalSection>) -> Vec<f64> {
    let mut y = vec![0.0; CanonicalSection::COUNT];
    for l in labels {
        y[l.index()] = 1.0;
    }
    y
}

/// Small, quickly trained models for service tests.
pub fn small_models(seed: u64) -> (Model, Model) {
    let mut data: Vec<(String, Vec<f64>)> = sentences(400, seed, true).into_iter().map(|s| (s, vec![0.9])).collect();
    data.extend(sentences(400, seed + 1, false).into_iter().map(|s| (s, vec![0.1])));
    let config = TrainConfig { hidden_width: 64, epochs: 5, seed, ..TrainConfig::regression() };
    let score = fit(&data, &[], Head::Regression, config).expect("score model trains").model;

    let records = section_corpus(12, 6, seed);
    let examples = build_context_examples(&records, ContextMode::WithNeighbors, 350);
    let pairs: Vec<(String, Vec<f64>)> =
        examples.iter().map(|e| (e.context_text.clone(), section_targets(&e.labels))).collect();
    let config = TrainConfig { hidden_width: 64, epochs: 20, seed, ..TrainConfig::multilabel() };
    let sections = fit(&pairs, &[], Head::Multilabel, config).expect("section model trains").model;
    (score, sections)
}

pub fn state_with(config: ServiceConfig, score: Model, sections: Model) -> Arc<AppState> {
    let config = ServiceConfig { listen: "127.0.0.1:0".parse().unwrap(), ..config };
    Arc::new(AppState::with_models(config, Models::new(Some(score), Some(sections)).unwrap()).unwrap())
}

#[derive(serde::Deserialize)]
struct StubRequest {
    sentence: String,
}

/// A paraphraser stand-in with one route per behaviour: `/echo`, `/upper`,
/// `/slow` (sleeps two seconds, then echoes), `/empty`, `/fail` (500) and
/// `/garbage` (non-JSON body).
pub async fn stub_paraphraser() -> std::net::SocketAddr {
    use axum::routing::post;
    use axum::Json;
    use serde_json::json;

    async fn echo(Json(r): Json<StubRequest>) -> Json<serde_json::Value> {
        Json(json!({"paraphrase": r.sentence}))
    }
    async fn upper(Json(r): Json<StubRequest>) -> Json<serde_json::Value> {
        Json(json!({"paraphrase": format!("  {}  ", r.sentence.to_uppercase())}))
    }
    async fn slow(Json(r): Json<StubRequest>) -> Json<serde_json::Value> {
        tokio::time::sleep(std::time::Duration::from_secs(2)).await;
        Json(json!({"paraphrase": r.sentence}))
    }
    async fn empty(Json(_): Json<StubRequest>) -> Json<serde_json::Value> {
        Json(json!({"paraphrase": "   "}))
    }
    async fn fail() -> axum::http::StatusCode {
        axum::http::StatusCode::INTERNAL_SERVER_ERROR
    }
    async fn garbage() -> &'static str {
        "definitely not json"
    }
    let app = axum::Router::new()
        .route("/echo", post(echo))
        .route("/upper", post(upper))
        .route("/slow", post(slow))
        .route("/empty", post(empty))
        .route("/fail", post(fail))
        .route("/garbage", post(garbage));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, app).await.unwrap();
    });
    addr
}
