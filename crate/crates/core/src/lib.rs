//! Sentence-level tooling for scientific prose: LaTeX corpus ingestion,
//! dataset construction, a bag-of-words scorer/classifier and the metrics
//! used to evaluate paraphrasers.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the CLI and service use.

pub mod corpus;
pub mod forge;
pub mod metrics;
pub mod mlp;
pub mod scalar;
pub mod text;

pub use corpus::{CanonicalSection, Rank, SentenceRecord};
pub use scalar::Scalar;

pub type Model = mlp::MlpModel<f64>;
pub type ModelF32 = mlp::MlpModel<f32>;
pub type BowVector = mlp::BowVector<f64>;
pub type TrainConfig = mlp::TrainConfig<f64>;
pub type TrainOutcome = mlp::TrainOutcome<f64>;
pub type EmbeddingTable = metrics::EmbeddingTable<f64>;
pub type MetricReport = metrics::MetricReport<f64>;
