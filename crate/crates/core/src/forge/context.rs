use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{CanonicalSection, Rank, SentenceRecord};

/// Word budget for one context window.
pub const DEFAULT_MAX_WORDS: usize = 350;

/// How many neighbouring sentences accompany the classified sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextMode {
    /// The sentence alone.
    Single = 1,
    /// Predecessor and sentence.
    WithPredecessor = 2,
    /// Predecessor, sentence and successor.
    WithNeighbors = 3,
}

impl ContextMode {
    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for ContextMode {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(ContextMode::Single),
            2 => Ok(ContextMode::WithPredecessor),
            3 => Ok(ContextMode::WithNeighbors),
            other => Err(format!("context mode must be 1, 2 or 3, got {other}")),
        }
    }
}

impl std::str::FromStr for ContextMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: u8 = s.trim().parse().map_err(|_| format!("context mode must be 1, 2 or 3, got `{s}`"))?;
        ContextMode::try_from(v)
    }
}

impl Serialize for ContextMode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for ContextMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        ContextMode::try_from(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionExample {
    pub context_text: String,
    pub labels: BTreeSet<CanonicalSection>,
    pub rank: Rank,
    pub context_mode: ContextMode,
    #[serde(default)]
    pub paper_id: String,
}

/// Joins the window around `sentences[focus]` and trims it to `max_words`.
///
/// Words are removed from the outside in: the start of the predecessor and
/// the end of the successor go first (longer side first), then the end of
/// the focus sentence itself.
pub fn assemble_context<S: AsRef<str>>(
    sentences: &[S],
    focus: usize,
    mode: ContextMode,
    max_words: usize,
) -> String {
    let words = |i: usize| -> Vec<&str> { sentences[i].as_ref().split_whitespace().collect() };
    let mut pred = match mode {
        ContextMode::Single => Vec::new(),
        _ if focus == 0 => Vec::new(),
        _ => words(focus - 1),
    };
    let mut succ = match mode {
        ContextMode::WithNeighbors if focus + 1 < sentences.len() => words(focus + 1),
        _ => Vec::new(),
    };
    let mut own = words(focus);
    let mut pred_start = 0;
    while pred.len() - pred_start + own.len() + succ.len() > max_words {
        let pred_left = pred.len() - pred_start;
        if pred_left > 0 && pred_left >= succ.len() {
            pred_start += 1;
        } else if !succ.is_empty() {
            succ.pop();
        } else if !own.is_empty() {
            own.pop();
        } else {
            break;
        }
    }
    pred.drain(..pred_start);
    pred.into_iter().chain(own).chain(succ).collect::<Vec<_>>().join(" ")
}

/// Builds one example per labelled record. Neighbours come only from the same
/// section of the same paper; records must arrive grouped and ordered by
/// `(paper_id, section_index, sentence_index)`.
pub fn build_context_examples(
    records: &[SentenceRecord],
    mode: ContextMode,
    max_words: usize,
) -> Vec<SectionExample> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = (&records[start].paper_id, records[start].section_index);
        let mut end = start + 1;
        while end < records.len() && (&records[end].paper_id, records[end].section_index) == key {
            end += 1;
        }
        let group = &records[start..end];
        let texts: Vec<&str> = group.iter().map(|r| r.text.as_str()).collect();
        for (i, record) in group.iter().enumerate() {
            if record.sections.is_empty() {
                continue;
            }
            out.push(SectionExample {
                context_text: assemble_context(&texts, i, mode, max_words),
                labels: record.sections.clone(),
                rank: record.rank,
                context_mode: mode,
                paper_id: record.paper_id.clone(),
            });
        }
        start = end;
    }
    out
}
