use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::filter::{filter_sentence, FilterReport};
use super::latex::{normalize_latex, NormalizeWarning};
use super::mapping::SectionTitleMapping;
use super::sections::split_at_sections;
use super::sentences::split_sentences;
use super::{RawPaper, SentenceRecord};

/// Something noteworthy that happened while ingesting one paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum PaperIssue {
    /// The paper has no `\section` command and was dropped.
    NoSections { paper_id: String },
    /// A second paper with an already seen id was skipped.
    DuplicateId { paper_id: String },
    /// The paper was kept, but normalization had to recover from malformed markup.
    Markup { paper_id: String, warning: NormalizeWarning },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestOutput {
    pub records: Vec<SentenceRecord>,
    pub report: FilterReport,
    pub issues: Vec<PaperIssue>,
    pub papers_total: usize,
    pub papers_used: usize,
}

/// Per-paper seed: a stable hash of the run seed and the paper id, so a
/// paper's output does not depend on which other papers are in the corpus.
pub fn paper_seed(seed: u64, paper_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(paper_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Normalize, extract sections, map titles, split and filter one paper.
pub fn ingest_paper(
    paper: &RawPaper,
    mapping: &SectionTitleMapping,
    name_pool: &[String],
    seed: u64,
) -> (Vec<SentenceRecord>, FilterReport, Vec<PaperIssue>) {
    let normalized = normalize_latex(&paper.latex_source, name_pool, paper_seed(seed, &paper.paper_id));
    let mut issues: Vec<PaperIssue> = normalized
        .warnings
        .into_iter()
        .map(|warning| PaperIssue::Markup { paper_id: paper.paper_id.clone(), warning })
        .collect();
    let sections = split_at_sections(&normalized.text);
    let mut records = Vec::new();
    let mut report = FilterReport::default();
    if sections.is_empty() {
        issues.push(PaperIssue::NoSections { paper_id: paper.paper_id.clone() });
        return (records, report, issues);
    }
    for (section_index, section) in sections.iter().enumerate() {
        let labels = mapping.map_title(&section.title);
        let mut sentence_index = 0;
        for sentence in split_sentences(&section.body) {
            let verdict = filter_sentence(&sentence);
            report.record(verdict);
            if verdict.is_accept() {
                records.push(SentenceRecord {
                    text: sentence,
                    paper_id: paper.paper_id.clone(),
                    rank: paper.rank,
                    sections: labels.clone(),
                    section_index,
                    sentence_index,
                });
                sentence_index += 1;
            }
        }
    }
    (records, report, issues)
}

/// Ingests a corpus. Papers are processed in parallel; the output order and
/// content depend only on the input order, `name_pool` and `seed`.
pub fn ingest_corpus(
    papers: &[RawPaper],
    mapping: &SectionTitleMapping,
    name_pool: &[String],
    seed: u64,
) -> IngestOutput {
    let mut seen = HashSet::new();
    let mut issues = Vec::new();
    let unique: Vec<&RawPaper> = papers
        .iter()
        .filter(|p| {
            let fresh = seen.insert(p.paper_id.as_str());
            if !fresh {
                issues.push(PaperIssue::DuplicateId { paper_id: p.paper_id.clone() });
            }
            fresh
        })
        .collect();
    let per_paper: Vec<_> = unique
        .par_iter()
        .map(|p| ingest_paper(p, mapping, name_pool, seed))
        .collect();
    let mut out = IngestOutput { papers_total: papers.len(), ..Default::default() };
    for (records, report, paper_issues) in per_paper {
        if !paper_issues.iter().any(|i| matches!(i, PaperIssue::NoSections { .. })) {
            out.papers_used += 1;
        }
        out.records.extend(records);
        out.report += report;
        issues.extend(paper_issues);
    }
    out.issues = issues;
    out
}
