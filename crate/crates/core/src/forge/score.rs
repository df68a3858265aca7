use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::SentenceRecord;
use crate::text::{EQUATION_TOKEN, REFERENCE_TOKEN};

pub const SCIENTIFIC_TARGET: f64 = 0.9;
pub const NONSCIENTIFIC_TARGET: f64 = 0.1;

/// Source corpus of a sentence; only `arxiv` counts as scientific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Arxiv,
    Books,
    Reddit,
    Twitter,
    Other,
}

impl Origin {
    pub fn target(self) -> f64 {
        if self == Origin::Arxiv {
            SCIENTIFIC_TARGET
        } else {
            NONSCIENTIFIC_TARGET
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Arxiv => "arxiv",
            Origin::Books => "books",
            Origin::Reddit => "reddit",
            Origin::Twitter => "twitter",
            Origin::Other => "other",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arxiv" => Ok(Origin::Arxiv),
            "books" => Ok(Origin::Books),
            "reddit" => Ok(Origin::Reddit),
            "twitter" => Ok(Origin::Twitter),
            "other" => Ok(Origin::Other),
            other => Err(format!("unknown origin `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreExample {
    pub text: String,
    pub target: f64,
    pub origin: Origin,
}

impl ScoreExample {
    pub fn new(text: impl Into<String>, origin: Origin) -> Self {
        Self { text: text.into(), target: origin.target(), origin }
    }
}

/// Labels scientific records 0.9 and everything else by its origin, then
/// shuffles with `seed`.
pub fn build_score_dataset(
    scientific: &[SentenceRecord],
    nonscientific: &[(String, Origin)],
    seed: u64,
) -> Vec<ScoreExample> {
    let mut out: Vec<ScoreExample> = scientific
        .iter()
        .map(|r| ScoreExample::new(r.text.clone(), Origin::Arxiv))
        .chain(nonscientific.iter().map(|(t, o)| ScoreExample::new(t.clone(), *o)))
        .collect();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

/// Inserts `<equation>`, `<reference>` or both at seeded random word
/// boundaries. The first word and the final punctuation stay in place, so
/// the result still passes the sentence filters.
pub fn inject_tokens(sentence: &str, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (body, tail) = split_terminal(sentence.trim());
    let mut words: Vec<&str> = body.split_whitespace().collect();
    let tokens: &[&str] = match rng.gen_range(0..3) {
        0 => &[EQUATION_TOKEN],
        1 => &[REFERENCE_TOKEN],
        _ => &[EQUATION_TOKEN, REFERENCE_TOKEN],
    };
    for token in tokens {
        let lo = usize::from(!words.is_empty());
        let pos = rng.gen_range(lo..=words.len());
        words.insert(pos, token);
    }
    let mut out = words.join(" ");
    out.push_str(tail);
    out
}

fn split_terminal(s: &str) -> (&str, &str) {
    let body = s.trim_end_matches(['.', '?', '!']);
    (body.trim_end(), &s[body.len()..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{filter_sentence, Rank};

    fn record(text: &str) -> SentenceRecord {
        SentenceRecord {
            text: text.into(),
            paper_id: "p".into(),
            rank: Rank::A,
            sections: Default::default(),
            section_index: 0,
            sentence_index: 0,
        }
    }

    #[test]
    fn targets_follow_origin() {
        let sci = [record("We propose a method.")];
        let non = [("lol that was fun ok.".to_string(), Origin::Reddit)];
        let data = build_score_dataset(&sci, &non, 1);
        for ex in &data {
            assert_eq!(ex.target == SCIENTIFIC_TARGET, ex.origin == Origin::Arxiv);
        }
        let arxiv = data.iter().find(|e| e.origin == Origin::Arxiv).unwrap();
        assert_eq!(arxiv.target, 0.9);
        let reddit = data.iter().find(|e| e.origin == Origin::Reddit).unwrap();
        assert_eq!(reddit.target, 0.1);
    }

    #[test]
    fn only_scientific_gives_all_high_targets() {
        let sci: Vec<_> = (0..5).map(|i| record(&format!("Sentence number {i} is here."))).collect();
        let data = build_score_dataset(&sci, &[], 3);
        assert_eq!(data.len(), 5);
        assert!(data.iter().all(|e| e.target == 0.9));
        assert_eq!(data, build_score_dataset(&sci, &[], 3));
    }

    #[test]
    fn reference_at_the_end_keeps_the_period() {
        let hit = (0..500u64).any(|seed| inject_tokens("I like my dog.", seed) == "I like my dog <reference>.");
        assert!(hit, "some seed inserts a lone reference before the period");
    }

    #[test]
    fn injection_is_deterministic() {
        assert_eq!(inject_tokens("I like my dog a lot.", 11), inject_tokens("I like my dog a lot.", 11));
    }

    #[test]
    fn every_injection_adds_a_placeholder_and_stays_valid() {
        let base = "My sister went to the market yesterday!";
        for seed in 0..1000 {
            let out = inject_tokens(base, seed);
            assert!(out.contains(EQUATION_TOKEN) || out.contains(REFERENCE_TOKEN), "{out}");
            assert!(out.starts_with("My "));
            assert!(out.ends_with('!'));
            assert!(filter_sentence(&out).is_accept(), "{out}");
            let added = out.split_whitespace().count() - base.split_whitespace().count();
            assert!((1..=2).contains(&added));
        }
    }
}
