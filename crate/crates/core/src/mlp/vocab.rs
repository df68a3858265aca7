use std::collections::{BTreeMap, HashMap};

use super::MlpError;
use crate::text::{is_placeholder, tokenize_lower, PLACEHOLDERS};
use crate::Scalar;

pub const DEFAULT_MIN_COUNT: usize = 2;

/// Lowercased token to contiguous index. The two placeholders always hold
/// indices 0 and 1; the rest follow in byte order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    min_count: usize,
}

impl Vocabulary {
    pub fn build<S: AsRef<str>>(texts: &[S], min_count: usize) -> Result<Self, MlpError> {
        if texts.is_empty() {
            return Err(MlpError::NoExamples);
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for text in texts {
            for token in tokenize_lower(text.as_ref()) {
                *counts.entry(token).or_default() += 1;
            }
        }
        let mut tokens: Vec<String> = PLACEHOLDERS.iter().map(|p| p.to_string()).collect();
        tokens.extend(
            counts
                .into_iter()
                .filter(|(t, c)| *c >= min_count && !is_placeholder(t))
                .map(|(t, _)| t),
        );
        if tokens.len() == PLACEHOLDERS.len() {
            return Err(MlpError::EmptyVocabulary { min_count });
        }
        Self::from_tokens(tokens, min_count)
    }

    pub(crate) fn from_tokens(tokens: Vec<String>, min_count: usize) -> Result<Self, MlpError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(MlpError::Shape(format!("duplicate vocabulary token {t:?}")));
            }
        }
        if PLACEHOLDERS.iter().any(|p| !index.contains_key(*p)) {
            return Err(MlpError::Shape("vocabulary lacks the placeholder tokens".into()));
        }
        Ok(Vocabulary { tokens, index, min_count })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Term frequencies of in-vocabulary tokens, divided by their total.
    /// Out-of-vocabulary tokens are ignored.
    pub fn featurize<T: Scalar>(&self, text: &str) -> BowVector<T> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for token in tokenize_lower(text) {
            if let Some(i) = self.index_of(&token) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let total: usize = counts.values().sum();
        let entries = counts
            .into_iter()
            .map(|(i, c)| (i, T::of_usize(c) / T::of_usize(total)))
            .collect();
        BowVector { entries }
    }
}

/// Sparse input vector, indices strictly increasing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BowVector<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> BowVector<T> {
    pub fn from_entries(mut entries: Vec<(usize, T)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        BowVector { entries }
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }
}
