//! Bucketed metric tables for parallel corpora.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;

use super::{bleu, embed_match_score, meteor_lite, wer, BleuConfig, EmbeddingTable, MetricError, SynonymTable};
use crate::forge::{Bucket, ParallelPair};
use crate::text::tokenize;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Output against the original.
    Bleu,
    /// Output against the original.
    Meteor,
    /// Output against the original (reference = original).
    Wer,
    /// Output against the corrupted input.
    #[serde(rename = "sbleu")]
    SelfBleu,
    /// Greedy embedding match of output against the original.
    Embed,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Meteor => "meteor",
            MetricKind::Wer => "wer",
            MetricKind::SelfBleu => "sbleu",
            MetricKind::Embed => "embed",
        }
    }

    /// Parses `bleu,meteor,wer,sbleu,embed:PATH`; returns the kinds and the
    /// embedding table path if one was named.
    pub fn parse_list(spec: &str) -> Result<(Vec<MetricKind>, Option<String>), MetricError> {
        let mut kinds = Vec::new();
        let mut table = None;
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(path) = item.strip_prefix("embed:") {
                table = Some(path.to_string());
                kinds.push(MetricKind::Embed);
            } else {
                kinds.push(item.parse()?);
            }
        }
        kinds.dedup();
        Ok((kinds, table))
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bleu" => Ok(MetricKind::Bleu),
            "meteor" => Ok(MetricKind::Meteor),
            "wer" => Ok(MetricKind::Wer),
            "sbleu" | "self_bleu" | "self-bleu" => Ok(MetricKind::SelfBleu),
            "embed" => Ok(MetricKind::Embed),
            other => Err(MetricError::UnknownMetric(other.to_string())),
        }
    }
}

/// Optional inputs some metrics need.
#[derive(Debug, Clone, Default)]
pub struct MetricResources<T> {
    pub synonyms: Option<SynonymTable>,
    pub embeddings: Option<EmbeddingTable<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    ByBucket,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow<T> {
    pub group: String,
    pub system: String,
    pub metric: String,
    pub value: T,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub dataset: String,
    pub model: String,
    pub timestamp: String,
    /// Which variant each metric name refers to.
    pub variants: BTreeMap<String, String>,
    pub rows: Vec<ReportRow<T>>,
    pub notes: Vec<String>,
}

impl<T: Scalar> MetricReport<T> {
    pub fn value(&self, group: &str, system: &str, metric: &str) -> Option<T> {
        self.rows
            .iter()
            .find(|r| r.group == group && r.system == system && r.metric == metric)
            .map(|r| r.value)
    }
}

pub const MODEL_SYSTEM: &str = "model";
pub const IDENTITY_SYSTEM: &str = "identity";

fn pair_metric<T: Scalar>(
    kind: MetricKind,
    output: &[String],
    original: &[String],
    corrupted: &[String],
    res: &MetricResources<T>,
) -> Result<T, MetricError> {
    let empty_output = output.is_empty();
    Ok(match kind {
        MetricKind::Wer => wer(original, output)?,
        _ if empty_output => T::zero(),
        MetricKind::Bleu => bleu(output, &[original])?,
        MetricKind::SelfBleu => bleu(output, &[corrupted])?,
        MetricKind::Meteor => meteor_lite(output, original, res.synonyms.as_ref()),
        MetricKind::Embed => {
            let table = res.embeddings.as_ref().ok_or(MetricError::MissingResource("embed"))?;
            embed_match_score(output, original, table)?
        }
    })
}

/// Mean of each metric per group, for the model outputs and for the
/// identity baseline (output = corrupted input). Empty groups are omitted
/// with a note.
pub fn evaluate_pairs<T: Scalar>(
    pairs: &[ParallelPair],
    outputs: &[String],
    metrics: &[MetricKind],
    resources: &MetricResources<T>,
    grouping: Grouping,
) -> Result<MetricReport<T>, MetricError> {
    if pairs.len() != outputs.len() {
        return Err(MetricError::LengthMismatch { left: pairs.len(), right: outputs.len() });
    }
    if metrics.contains(&MetricKind::Embed) && resources.embeddings.is_none() {
        return Err(MetricError::MissingResource("embed"));
    }
    let mut groups: BTreeMap<Option<Bucket>, Vec<usize>> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        let key = match grouping {
            Grouping::ByBucket => Some(p.bucket),
            Grouping::All => None,
        };
        groups.entry(key).or_default().push(i);
    }
    let group_name = |k: &Option<Bucket>| k.map_or_else(|| "all".to_string(), |b| b.to_string());
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let keys: Vec<Option<Bucket>> = match grouping {
        Grouping::ByBucket => Bucket::ALL.iter().copied().map(Some).collect(),
        Grouping::All => vec![None],
    };
    for key in keys {
        let Some(members) = groups.get(&key).filter(|m| !m.is_empty()) else {
            notes.push(format!("group {} is empty and was omitted", group_name(&key)));
            continue;
        };
        for (system, use_identity) in [(MODEL_SYSTEM, false), (IDENTITY_SYSTEM, true)] {
            for &kind in metrics {
                let mut total = T::zero();
                for &i in members {
                    let original = tokenize(&pairs[i].original);
                    let corrupted = tokenize(&pairs[i].corrupted);
                    let output = if use_identity { corrupted.clone() } else { tokenize(&outputs[i]) };
                    if original.is_empty() {
                        return Err(MetricError::EmptyInput("original sentence"));
                    }
                    total += pair_metric(kind, &output, &original, &corrupted, resources)?;
                }
                rows.push(ReportRow {
                    group: group_name(&key),
                    system: system.to_string(),
                    metric: kind.as_str().to_string(),
                    value: total / T::of_usize(members.len()),
                    count: members.len(),
                });
            }
        }
    }
    let mut variants = BTreeMap::new();
    for &kind in metrics {
        let text = match kind {
            MetricKind::Bleu => format!("{} vs original", BleuConfig::default().variant()),
            MetricKind::SelfBleu => format!("{} vs corrupted input", BleuConfig::default().variant()),
            MetricKind::Meteor => "unigram METEOR (exact, stem, synonym), alpha 0.9 beta 3 gamma 0.5".to_string(),
            MetricKind::Wer => "word error rate of output vs original".to_string(),
            MetricKind::Embed => "greedy static-embedding match F".to_string(),
        };
        variants.insert(kind.as_str().to_string(), text);
    }
    Ok(MetricReport {
        dataset: String::new(),
        model: String::new(),
        timestamp: String::new(),
        variants,
        rows,
        notes,
    })
}

/// Per-bucket report with the identity baseline.
pub fn bucket_report<T: Scalar>(
    pairs: &[ParallelPair],
    outputs: &[String],
    metrics: &[MetricKind],
    resources: &MetricResources<T>,
) -> Result<MetricReport<T>, MetricError> {
    evaluate_pairs(pairs, outputs, metrics, resources, Grouping::ByBucket)
}
