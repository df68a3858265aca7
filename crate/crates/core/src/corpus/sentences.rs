/// Splits text after `.`, `?` or `!` when followed by whitespace or the end of
/// the text. No abbreviation handling: "e.g. we" splits after "e.g.".
pub fn split_sentences(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = body.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_trimmed(&mut out, &body[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut out, &body[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, fragment: &str) {
    let t = fragment.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_at_terminators() {
        assert_eq!(split_sentences("A works. B fails! C?"), ["A works.", "B fails!", "C?"]);
    }

    #[test]
    fn empty_input() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn naive_on_abbreviations() {
        assert_eq!(split_sentences("e.g. we test."), ["e.g.", "we test."]);
    }

    #[test]
    fn keeps_unterminated_tail_and_decimals() {
        assert_eq!(split_sentences("Pi is 3.14 here. And a tail"), ["Pi is 3.14 here.", "And a tail"]);
        assert_eq!(split_sentences("Why?! Yes."), ["Why?!", "Yes."]);
    }
}
