//! Evaluation measures and bucketed reports.
//!
//! Sentence inputs are token slices; use [`crate::text::tokenize`] on both
//! sides so hypothesis and reference are split the same way.

mod basic;
mod bleu;
mod embed;
mod meteor;
mod report;
mod wer;

use thiserror::Error;

pub use basic::{mse, sample_f1};
pub use bleu::{bleu, bleu_with, corpus_bleu, self_bleu, BleuConfig, Smoothing};
pub use embed::{embed_match_score, EmbeddingTable, UNKNOWN_TOKEN};
pub use meteor::{meteor_lite, meteor_with, Alignment, MeteorParams, SynonymTable};
pub use report::{
    bucket_report, evaluate_pairs, Grouping, MetricKind, MetricReport, MetricResources, ReportRow,
};
pub use wer::{edit_distance, wer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("embedding table has no `<unk>` row")]
    MissingUnknown,
    #[error("embedding table line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("metric `{0}` needs resources that were not supplied")]
    MissingResource(&'static str),
}
