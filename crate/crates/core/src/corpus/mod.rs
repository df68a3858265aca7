//! LaTeX paper ingestion: normalization, section extraction, sentence splitting and filtering.

mod filter;
mod ingest;
mod latex;
mod mapping;
mod sections;
mod sentences;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use filter::{filter_sentence, FilterReport, FilterVerdict, RejectReason};
pub use ingest::{ingest_corpus, ingest_paper, paper_seed, IngestOutput, PaperIssue};
pub use latex::{normalize_latex, strip_comments, NormalizeOutput, NormalizeWarning};
pub use mapping::{normalize_title, MappingError, SectionTitleMapping, DEFAULT_MAPPING};
pub use sections::{extract_sections, Section};
pub use sentences::split_sentences;

/// Conference quality tier of the venue a paper appeared at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Rank {
    #[serde(rename = "A*")]
    AStar,
    A,
    B,
    C,
    #[default]
    #[serde(rename = "unknown")]
    Unknown,
}

impl Rank {
    pub fn as_str(self) -> &'static str {
        match self {
            Rank::AStar => "A*",
            Rank::A => "A",
            Rank::B => "B",
            Rank::C => "C",
            Rank::Unknown => "unknown",
        }
    }

    /// Reporting group: B and C papers are pooled into one bucket.
    pub fn report_group(self) -> &'static str {
        match self {
            Rank::B | Rank::C => "B+C",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rank {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A*" | "a*" => Ok(Rank::AStar),
            "A" | "a" => Ok(Rank::A),
            "B" | "b" => Ok(Rank::B),
            "C" | "c" => Ok(Rank::C),
            "unknown" | "" | "-" => Ok(Rank::Unknown),
            other => Err(format!("unknown rank `{other}`")),
        }
    }
}

/// The seven section classes a sentence can be labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalSection {
    Introduction,
    RelatedWork,
    Method,
    Experiment,
    Result,
    Discussion,
    Conclusion,
}

impl CanonicalSection {
    pub const ALL: [CanonicalSection; 7] = [
        CanonicalSection::Introduction,
        CanonicalSection::RelatedWork,
        CanonicalSection::Method,
        CanonicalSection::Experiment,
        CanonicalSection::Result,
        CanonicalSection::Discussion,
        CanonicalSection::Conclusion,
    ];
    pub const COUNT: usize = 7;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CanonicalSection::Introduction => "introduction",
            CanonicalSection::RelatedWork => "related_work",
            CanonicalSection::Method => "method",
            CanonicalSection::Experiment => "experiment",
            CanonicalSection::Result => "result",
            CanonicalSection::Discussion => "discussion",
            CanonicalSection::Conclusion => "conclusion",
        }
    }
}

impl fmt::Display for CanonicalSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CanonicalSection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| format!("unknown section class `{}`", s.trim()))
    }
}

/// One paper's LaTeX source (all files concatenated) plus its venue rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPaper {
    pub paper_id: String,
    pub latex_source: String,
    pub rank: Rank,
}

/// A normalized sentence that passed every filter, with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub text: String,
    pub paper_id: String,
    pub rank: Rank,
    pub sections: BTreeSet<CanonicalSection>,
    pub section_index: usize,
    pub sentence_index: usize,
}
