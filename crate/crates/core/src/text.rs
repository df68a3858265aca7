//! Placeholder tokens and the word tokenizer shared by the model vocabulary and the metrics.

pub const REFERENCE_TOKEN: &str = "<reference>";
pub const EQUATION_TOKEN: &str = "<equation>";
pub const PLACEHOLDERS: [&str; 2] = [EQUATION_TOKEN, REFERENCE_TOKEN];

pub fn is_placeholder(token: &str) -> bool {
    PLACEHOLDERS.contains(&token)
}

/// Whitespace tokens with leading and trailing punctuation split off as
/// separate tokens. Placeholders stay whole; inner punctuation (`don't`,
/// `state-of-the-art`, `3.5`) stays inside its word. Case is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        split_word(word, &mut out);
    }
    out
}

/// [`tokenize`] followed by ASCII lowercasing, the vocabulary's view of a text.
pub fn tokenize_lower(text: &str) -> Vec<String> {
    let mut tokens = tokenize(text);
    for t in &mut tokens {
        t.make_ascii_lowercase();
    }
    tokens
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

fn split_word(word: &str, out: &mut Vec<String>) {
    let mut core = word;
    let mut leading = Vec::new();
    let mut trailing = Vec::new();
    loop {
        if is_placeholder(core) || core.chars().count() <= 1 {
            break;
        }
        let first = core.chars().next().unwrap();
        let last = core.chars().next_back().unwrap();
        if is_punct(last) && !ends_with_placeholder(core) {
            trailing.push(&core[core.len() - last.len_utf8()..]);
            core = &core[..core.len() - last.len_utf8()];
        } else if is_punct(first) && !starts_with_placeholder(core) {
            leading.push(&core[..first.len_utf8()]);
            core = &core[first.len_utf8()..];
        } else {
            break;
        }
    }
    out.extend(leading.into_iter().map(str::to_string));
    if !core.is_empty() {
        out.push(core.to_string());
    }
    out.extend(trailing.into_iter().rev().map(str::to_string));
}

fn ends_with_placeholder(s: &str) -> bool {
    PLACEHOLDERS.iter().any(|p| s.ends_with(p))
}

fn starts_with_placeholder(s: &str) -> bool {
    PLACEHOLDERS.iter().any(|p| s.starts_with(p))
}

/// Number of whitespace-delimited words; placeholders count as one word each.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}
