use serde::Serialize;

use super::latex::strip_comments;

/// A top-level section: its title as written and its body text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Section {
    pub title: String,
    pub body: String,
}

const SUB_LEVELS: &[&str] = &["subsubsection", "subsection", "subparagraph", "paragraph"];

/// Splits a document at its `\section` / `\section*` commands.
///
/// Text before the first section is discarded. Lower sectioning commands are
/// removed with their titles, so their text folds into the parent section.
/// A document without any section command yields an empty list.
pub fn extract_sections(source: &str) -> Vec<Section> {
    split_at_sections(&strip_comments(source))
}

/// [`extract_sections`] for text that is already free of comments, such as
/// the output of [`super::normalize_latex`] (where `%` is literal text).
pub(crate) fn split_at_sections(source: &str) -> Vec<Section> {
    let starts: Vec<(usize, usize, String)> = find_commands(source, "section")
        .into_iter()
        .filter_map(|(cmd_start, after)| {
            read_group(source, after).map(|(title, end)| (cmd_start, end, title.trim().to_string()))
        })
        .collect();
    let mut sections = Vec::with_capacity(starts.len());
    for (k, (_, body_start, title)) in starts.iter().enumerate() {
        let body_end = starts.get(k + 1).map_or(source.len(), |next| next.0);
        let body = remove_sub_sections(&source[*body_start..body_end]);
        sections.push(Section { title: title.clone(), body: body.trim().to_string() });
    }
    sections
}

/// Finds `\name` and `\name*` (not a longer command name). Returns the command
/// start and the index just after the name and optional star.
fn find_commands(source: &str, name: &str) -> Vec<(usize, usize)> {
    let pat = format!("\\{name}");
    let bytes = source.as_bytes();
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(rel) = source[from..].find(&pat) {
        let start = from + rel;
        let mut after = start + pat.len();
        from = after;
        if start > 0 && bytes[start - 1] == b'\\' {
            continue;
        }
        if bytes.get(after).is_some_and(|b| b.is_ascii_alphabetic()) {
            continue;
        }
        if bytes.get(after) == Some(&b'*') {
            after += 1;
        }
        out.push((start, after));
    }
    out
}

/// Reads optional `[...]` arguments then a balanced `{...}` group starting at
/// `i`. Returns the group content and the index after the closing brace.
fn read_group(source: &str, mut i: usize) -> Option<(String, usize)> {
    let bytes = source.as_bytes();
    loop {
        while bytes.get(i).is_some_and(u8::is_ascii_whitespace) {
            i += 1;
        }
        if bytes.get(i) == Some(&b'[') {
            i += source[i..].find(']')? + 1;
        } else {
            break;
        }
    }
    if bytes.get(i) != Some(&b'{') {
        return None;
    }
    let mut depth = 0usize;
    let mut j = i;
    while j < bytes.len() {
        match bytes[j] {
            b'\\' => {
                j += 2;
                continue;
            }
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((source[i + 1..j].to_string(), j + 1));
                }
            }
            _ => {}
        }
        j += 1;
    }
    None
}

fn remove_sub_sections(body: &str) -> String {
    let mut cuts: Vec<(usize, usize)> = Vec::new();
    for level in SUB_LEVELS {
        for (start, after) in find_commands(body, level) {
            let end = read_group(body, after).map_or(after, |(_, end)| end);
            cuts.push((start, end));
        }
    }
    cuts.sort_unstable();
    let mut out = String::with_capacity(body.len());
    let mut pos = 0;
    for (start, end) in cuts {
        if start < pos {
            continue;
        }
        out.push_str(&body[pos..start]);
        out.push(' ');
        pos = end;
    }
    out.push_str(&body[pos..]);
    out
}
