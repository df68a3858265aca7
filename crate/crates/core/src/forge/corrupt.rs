//! Insert / delete / modify corruption of sentences.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bucket::{bucketize, ParallelPair};
use super::ForgeError;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Insert,
    Delete,
    Modify,
}

/// One edit, with `position` relative to the sequence as it is when the op runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionOp {
    pub kind: OpKind,
    pub position: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct OracleError(pub String);

/// Proposes a word for a gap given the words to its left and right.
pub trait SubstitutionOracle {
    fn propose(
        &mut self,
        left: &[String],
        right: &[String],
        rng: &mut ChaCha8Rng,
    ) -> Result<String, OracleError>;
}

/// Samples words in proportion to their corpus frequency, ignoring context.
#[derive(Debug, Clone)]
pub struct UnigramOracle {
    words: Vec<String>,
    weights: Option<WeightedIndex<u64>>,
}

impl UnigramOracle {
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Self {
        let (words, freqs): (Vec<String>, Vec<u64>) =
            counts.iter().filter(|(_, &c)| c > 0).map(|(w, &c)| (w.clone(), c)).unzip();
        let weights = WeightedIndex::new(&freqs).ok();
        Self { words, weights }
    }

    /// Counts word tokens (anything with an alphanumeric character) of `texts`.
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts = BTreeMap::new();
        for text in texts {
            for tok in tokenize(text) {
                if tok.chars().any(char::is_alphanumeric) {
                    *counts.entry(tok).or_insert(0u64) += 1;
                }
            }
        }
        Self::from_counts(&counts)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }
}

impl SubstitutionOracle for UnigramOracle {
    fn propose(
        &mut self,
        _left: &[String],
        _right: &[String],
        rng: &mut ChaCha8Rng,
    ) -> Result<String, OracleError> {
        match &self.weights {
            Some(w) => Ok(self.words[w.sample(rng)].clone()),
            None => Err(OracleError("unigram table is empty".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corruption {
    pub tokens: Vec<String>,
    pub ops: Vec<CorruptionOp>,
    /// Oracle failures that were answered by the unigram fallback.
    pub warnings: Vec<String>,
}

/// Number of edits for a sentence of `len` words at `rate`.
pub fn op_count(rate: f64, len: usize) -> usize {
    ((rate * len as f64).round() as usize).min(len / 2)
}

/// Applies `round(rate * len)` random edits (at most half the words).
///
/// Kinds are drawn uniformly; positions uniformly over the positions valid at
/// that moment; inserted and modified words come from `oracle`, or from
/// `fallback` when the oracle fails. Later edits may undo earlier ones.
pub fn corrupt_sentence_idm(
    tokens: &[String],
    rate: f64,
    oracle: &mut dyn SubstitutionOracle,
    fallback: &mut UnigramOracle,
    seed: u64,
) -> Result<Corruption, ForgeError> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(ForgeError::BadRate(rate));
    }
    if tokens.len() < 4 {
        return Err(ForgeError::TooFewTokens(tokens.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = tokens.to_vec();
    let mut ops = Vec::new();
    let mut warnings = Vec::new();
    for _ in 0..op_count(rate, tokens.len()) {
        let kind = match rng.gen_range(0..3) {
            0 => OpKind::Insert,
            1 => OpKind::Delete,
            _ => OpKind::Modify,
        };
        let op = match kind {
            OpKind::Delete => {
                let position = rng.gen_range(0..current.len());
                CorruptionOp { kind, position, token: None }
            }
            OpKind::Insert | OpKind::Modify => {
                let (position, left, right) = if kind == OpKind::Insert {
                    let p = rng.gen_range(0..=current.len());
                    (p, &current[..p], &current[p..])
                } else {
                    let p = rng.gen_range(0..current.len());
                    (p, &current[..p], &current[p + 1..])
                };
                let word = match oracle.propose(left, right, &mut rng) {
                    Ok(w) if !w.trim().is_empty() => w.trim().to_string(),
                    Ok(_) => {
                        warnings.push("oracle returned an empty word".to_string());
                        fallback
                            .propose(left, right, &mut rng)
                            .map_err(|e| ForgeError::OracleExhausted(e.0))?
                    }
                    Err(e) => {
                        warnings.push(format!("oracle failed: {e}"));
                        fallback
                            .propose(left, right, &mut rng)
                            .map_err(|e| ForgeError::OracleExhausted(e.0))?
                    }
                };
                CorruptionOp { kind, position, token: Some(word) }
            }
        };
        apply_one(&mut current, &op, ops.len())?;
        ops.push(op);
    }
    Ok(Corruption { tokens: current, ops, warnings })
}

fn apply_one(tokens: &mut Vec<String>, op: &CorruptionOp, index: usize) -> Result<(), ForgeError> {
    let invalid = || ForgeError::InvalidOp { index, kind: op.kind, position: op.position, len: tokens.len() };
    match (op.kind, &op.token) {
        (OpKind::Insert, Some(t)) if op.position <= tokens.len() => tokens.insert(op.position, t.clone()),
        (OpKind::Delete, _) if op.position < tokens.len() => {
            tokens.remove(op.position);
        }
        (OpKind::Modify, Some(t)) if op.position < tokens.len() => tokens[op.position] = t.clone(),
        _ => return Err(invalid()),
    }
    Ok(())
}

/// Replays an op log on `tokens`.
pub fn apply_ops(tokens: &[String], ops: &[CorruptionOp]) -> Result<Vec<String>, ForgeError> {
    let mut current = tokens.to_vec();
    for (i, op) in ops.iter().enumerate() {
        apply_one(&mut current, op, i)?;
    }
    Ok(current)
}

/// Replaces every literal `[MASK]` by `MASK`.
pub fn strip_mask_brackets(text: &str) -> String {
    text.replace("[MASK]", "MASK")
}

/// Corrupts one sentence into a parallel pair. The change rate is the
/// number of applied edits over the sentence length.
pub fn make_idm_pair(
    sentence: &str,
    rate: f64,
    oracle: &mut dyn SubstitutionOracle,
    fallback: &mut UnigramOracle,
    seed: u64,
) -> Result<(ParallelPair, Corruption), ForgeError> {
    let original = strip_mask_brackets(sentence);
    let tokens: Vec<String> = original.split_whitespace().map(str::to_string).collect();
    let corruption = corrupt_sentence_idm(&tokens, rate, oracle, fallback, seed)?;
    let change_rate = corruption.ops.len() as f64 / tokens.len() as f64;
    let corrupted = corruption.tokens.join(" ");
    let bucket = bucketize(&original, &corrupted, Some(change_rate));
    Ok((ParallelPair { corrupted, original, change_rate, bucket }, corruption))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn table() -> UnigramOracle {
        UnigramOracle::from_texts(["the model learns a robust representation of data quickly"])
    }

    struct Failing;
    impl SubstitutionOracle for Failing {
        fn propose(&mut self, _: &[String], _: &[String], _: &mut ChaCha8Rng) -> Result<String, OracleError> {
            Err(OracleError("offline".into()))
        }
    }

    #[test]
    fn zero_rate_is_identity() {
        let toks = words("We train a small model here.");
        let mut t = table();
        let c = corrupt_sentence_idm(&toks, 0.0, &mut t.clone(), &mut t, 1).unwrap();
        assert_eq!(c.tokens, toks);
        assert!(c.ops.is_empty());
    }

    #[test]
    fn fifteen_words_at_forty_percent_is_six_ops() {
        let toks = words("one two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen");
        let mut t = table();
        let c = corrupt_sentence_idm(&toks, 0.4, &mut t.clone(), &mut t, 3).unwrap();
        assert_eq!(c.ops.len(), 6);
    }

    #[test]
    fn ten_words_at_half_rate_replays() {
        let toks = words("a b c d e f g h i j");
        let mut t = table();
        let c = corrupt_sentence_idm(&toks, 0.5, &mut t.clone(), &mut t, 77).unwrap();
        assert_eq!(c.ops.len(), 5);
        assert_eq!(apply_ops(&toks, &c.ops).unwrap(), c.tokens);
    }

    #[test]
    fn oracle_failure_falls_back_with_warning() {
        let toks = words("a b c d e f g h i j");
        let mut t = table();
        let c = corrupt_sentence_idm(&toks, 0.5, &mut Failing, &mut t, 2).unwrap();
        let substitutions = c.ops.iter().filter(|o| o.kind != OpKind::Delete).count();
        assert_eq!(c.warnings.len(), substitutions);
        let mut empty = UnigramOracle::from_texts([]);
        let all_fail = (0..50).any(|s| corrupt_sentence_idm(&toks, 0.5, &mut Failing, &mut empty, s).is_err());
        assert!(all_fail);
    }

    #[test]
    fn rejects_short_input_and_bad_rates() {
        let mut t = table();
        assert_eq!(
            corrupt_sentence_idm(&words("a b c"), 0.1, &mut t.clone(), &mut t, 0),
            Err(ForgeError::TooFewTokens(3))
        );
        assert!(corrupt_sentence_idm(&words("a b c d"), f64::NAN, &mut t.clone(), &mut t, 0).is_err());
    }

    #[test]
    fn invalid_replay_is_an_error() {
        let op = CorruptionOp { kind: OpKind::Delete, position: 4, token: None };
        assert!(apply_ops(&words("a b c d"), &[op]).is_err());
    }

    #[test]
    fn mask_brackets() {
        assert_eq!(strip_mask_brackets("We train with [MASK] tokens."), "We train with MASK tokens.");
        assert_eq!(strip_mask_brackets("No masks here."), "No masks here.");
        assert_eq!(strip_mask_brackets("[MASK][MASK]"), "MASKMASK");
    }

    #[test]
    fn idm_pair_bucket_matches_change_rate() {
        let mut t = table();
        let (pair, c) = make_idm_pair("We use [MASK] in this simple sentence today.", 0.3, &mut t.clone(), &mut t, 4).unwrap();
        assert_eq!(pair.original, "We use MASK in this simple sentence today.");
        assert_eq!(c.ops.len(), 2);
        assert!((pair.change_rate - 0.25).abs() < 1e-12);
        assert_eq!(pair.bucket, crate::forge::Bucket::Percent(30));
    }

    proptest! {
        #[test]
        fn op_count_and_replay(len in 4usize..30, rate_step in 0usize..6, seed: u64) {
            let toks: Vec<String> = (0..len).map(|i| format!("w{i}")).collect();
            let rate = rate_step as f64 / 10.0;
            let mut t = table();
            let c = corrupt_sentence_idm(&toks, rate, &mut t.clone(), &mut t, seed).unwrap();
            prop_assert!(c.ops.len() <= len / 2);
            prop_assert_eq!(c.ops.len(), op_count(rate, len));
            prop_assert_eq!(apply_ops(&toks, &c.ops).unwrap(), c.tokens.clone());
            let again = corrupt_sentence_idm(&toks, rate, &mut t.clone(), &mut t, seed).unwrap();
            prop_assert_eq!(again, c);
        }
    }
}
