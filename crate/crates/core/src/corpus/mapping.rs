use std::collections::BTreeSet;
use std::str::FromStr;

use thiserror::Error;

use super::CanonicalSection;

/// Starter title dictionary shipped with the crate.
pub const DEFAULT_MAPPING: &str = include_str!("../../data/section_mapping.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("line {line}: expected `pattern<TAB>class[,class]`")]
    Malformed { line: usize },
    #[error("line {line}: {message}")]
    UnknownClass { line: usize, message: String },
    #[error("line {line}: pattern is empty after normalization")]
    EmptyPattern { line: usize },
    #[error("mapping has no entries")]
    Empty,
}

/// Dictionary from normalized title phrases to section classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionTitleMapping {
    entries: Vec<(Vec<String>, BTreeSet<CanonicalSection>)>,
}

impl SectionTitleMapping {
    pub fn new(
        entries: impl IntoIterator<Item = (String, BTreeSet<CanonicalSection>)>,
    ) -> Result<Self, MappingError> {
        let mut out = Vec::new();
        for (line, (pattern, classes)) in entries.into_iter().enumerate() {
            let words = title_words(&pattern);
            if words.is_empty() {
                return Err(MappingError::EmptyPattern { line: line + 1 });
            }
            if classes.is_empty() {
                return Err(MappingError::Malformed { line: line + 1 });
            }
            out.push((words, classes));
        }
        if out.is_empty() {
            return Err(MappingError::Empty);
        }
        Ok(Self { entries: out })
    }

    /// Parses `pattern<TAB>class[,class]` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, MappingError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (pattern, classes) = raw.split_once('\t').ok_or(MappingError::Malformed { line })?;
            let classes = classes
                .split(',')
                .filter(|c| !c.trim().is_empty())
                .map(|c| {
                    CanonicalSection::from_str(c)
                        .map_err(|message| MappingError::UnknownClass { line, message })
                })
                .collect::<Result<BTreeSet<_>, _>>()?;
            if classes.is_empty() {
                return Err(MappingError::Malformed { line });
            }
            let words = title_words(pattern);
            if words.is_empty() {
                return Err(MappingError::EmptyPattern { line });
            }
            entries.push((words, classes));
        }
        if entries.is_empty() {
            return Err(MappingError::Empty);
        }
        Ok(Self { entries })
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_MAPPING).expect("bundled mapping parses")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Union of the classes of every phrase occurring in `title`.
    pub fn map_title(&self, title: &str) -> BTreeSet<CanonicalSection> {
        let words = title_words(title);
        let mut out = BTreeSet::new();
        for (pattern, classes) in &self.entries {
            if words.windows(pattern.len()).any(|w| w == pattern.as_slice()) {
                out.extend(classes.iter().copied());
            }
        }
        out
    }
}

/// Lowercases a title and strips LaTeX commands, braces and punctuation.
pub fn normalize_title(title: &str) -> String {
    let mut cleaned = String::with_capacity(title.len());
    let mut chars = title.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            while chars.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                chars.next();
            }
            cleaned.push(' ');
        } else if c.is_alphanumeric() {
            cleaned.extend(c.to_lowercase());
        } else {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn title_words(title: &str) -> Vec<String> {
    normalize_title(title).split(' ').filter(|w| !w.is_empty()).map(singular).collect()
}

fn singular(word: &str) -> String {
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CanonicalSection::*;

    fn set(items: &[CanonicalSection]) -> BTreeSet<CanonicalSection> {
        items.iter().copied().collect()
    }

    #[test]
    fn compound_title_maps_to_union() {
        let m = SectionTitleMapping::builtin();
        assert_eq!(m.map_title("Introduction and Background"), set(&[Introduction, RelatedWork]));
        assert_eq!(m.map_title("Results and Discussion"), set(&[Result, Discussion]));
    }

    #[test]
    fn exact_and_unmatched_titles() {
        let m = SectionTitleMapping::builtin();
        assert_eq!(m.map_title("Conclusion"), set(&[Conclusion]));
        assert_eq!(m.map_title("Acknowledgements"), set(&[]));
        assert_eq!(m.map_title("Appendix"), set(&[]));
    }

    #[test]
    fn ignores_case_markup_and_plurals() {
        let m = SectionTitleMapping::builtin();
        assert_eq!(m.map_title("4. \\textbf{EXPERIMENTS}"), set(&[Experiment]));
        assert_eq!(m.map_title("Experimental Apparatus"), set(&[Experiment]));
        assert_eq!(m.map_title("Evaluation"), set(&[Experiment, Result]));
        assert_eq!(m.map_title("Related-Work"), set(&[RelatedWork]));
    }

    #[test]
    fn phrase_needs_contiguous_words() {
        let m = SectionTitleMapping::parse("related work\trelated_work\n").unwrap();
        assert!(m.map_title("Work that is related").is_empty());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(SectionTitleMapping::parse("# only comments\n"), Err(MappingError::Empty));
        assert_eq!(
            SectionTitleMapping::parse("intro introduction"),
            Err(MappingError::Malformed { line: 1 })
        );
        assert!(matches!(
            SectionTitleMapping::parse("intro\tpreface"),
            Err(MappingError::UnknownClass { line: 1, .. })
        ));
    }

    #[test]
    fn normalizes_titles() {
        assert_eq!(normalize_title("  \\emph{Related} Work: An Overview! "), "related work an overview");
    }
}
