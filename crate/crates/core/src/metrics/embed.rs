use std::collections::HashMap;

use super::MetricError;
use crate::Scalar;

pub const UNKNOWN_TOKEN: &str = "<unk>";

/// Static token embeddings with a mandatory unknown-token row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    vectors: HashMap<String, Vec<T>>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dim: usize, vectors: HashMap<String, Vec<T>>) -> Result<Self, MetricError> {
        if !vectors.contains_key(UNKNOWN_TOKEN) {
            return Err(MetricError::MissingUnknown);
        }
        if let Some((tok, v)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(MetricError::Parse {
                line: 0,
                message: format!("`{tok}` has {} components, expected {dim}", v.len()),
            });
        }
        Ok(Self { dim, vectors })
    }

    /// Parses `dim N` followed by `token v1 ... vN` lines.
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(MetricError::Parse { line: 1, message: "missing `dim N` header".into() })?;
        let dim = header
            .trim()
            .strip_prefix("dim")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or(MetricError::Parse { line: 1, message: format!("bad header `{header}`") })?;
        let mut vectors = HashMap::new();
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-blank line has a token");
            let values = parts
                .map(|p| p.parse::<f64>().map(T::of))
                .collect::<Result<Vec<T>, _>>()
                .map_err(|e| MetricError::Parse { line: i + 1, message: e.to_string() })?;
            if values.len() != dim {
                return Err(MetricError::Parse {
                    line: i + 1,
                    message: format!("expected {dim} values, found {}", values.len()),
                });
            }
            vectors.insert(token.to_string(), values);
        }
        Self::new(dim, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exact token, then its lowercase form, then the unknown row.
    pub fn lookup(&self, token: &str) -> &[T] {
        self.vectors
            .get(token)
            .or_else(|| self.vectors.get(&token.to_lowercase()))
            .unwrap_or_else(|| &self.vectors[UNKNOWN_TOKEN])
    }
}

fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    let na: T = a.iter().map(|&x| x * x).sum::<T>().sqrt();
    let nb: T = b.iter().map(|&x| x * x).sum::<T>().sqrt();
    if na == T::zero() || nb == T::zero() {
        T::zero()
    } else {
        dot / (na * nb)
    }
}

/// Greedy embedding match: each token is credited with its best cosine in
/// the other sentence; recall averages over the reference, precision over the
/// hypothesis, and the result is their harmonic mean.
pub fn embed_match_score<T: Scalar, S: AsRef<str>>(
    hypothesis: &[S],
    reference: &[S],
    table: &EmbeddingTable<T>,
) -> Result<T, MetricError> {
    if hypothesis.is_empty() {
        return Err(MetricError::EmptyInput("hypothesis"));
    }
    if reference.is_empty() {
        return Err(MetricError::EmptyInput("reference"));
    }
    let hv: Vec<&[T]> = hypothesis.iter().map(|t| table.lookup(t.as_ref())).collect();
    let rv: Vec<&[T]> = reference.iter().map(|t| table.lookup(t.as_ref())).collect();
    let best = |from: &[&[T]], to: &[&[T]]| -> T {
        let total: T = from
            .iter()
            .map(|a| to.iter().map(|b| cosine(a, b)).fold(T::neg_infinity(), T::max))
            .sum();
        total / T::of_usize(from.len())
    };
    let recall = best(&rv, &hv);
    let precision = best(&hv, &rv);
    if precision + recall <= T::zero() {
        return Ok(T::zero());
    }
    Ok(T::of(2.0) * precision * recall / (precision + recall))
}
