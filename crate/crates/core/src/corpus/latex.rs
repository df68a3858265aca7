//! Best-effort LaTeX to plain text conversion.
//!
//! Citations become `<reference>`, math becomes `<equation>`, markup and
//! non-text material is dropped. `\section` commands are kept (with a
//! normalized title) so that section extraction can run on the output;
//! lower sectioning levels are removed together with their titles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::text::{EQUATION_TOKEN, REFERENCE_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalizeWarning {
    /// A `$`, `$$`, `\(` or `\[` span without its closing delimiter.
    UnbalancedMath { offset: usize },
    /// A `{` without matching `}` or a stray `}`.
    UnbalancedBrace { offset: usize },
    /// `\begin{name}` of a skipped environment without its `\end`.
    UnterminatedEnvironment { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizeOutput {
    pub text: String,
    pub warnings: Vec<NormalizeWarning>,
    /// Number of reference-producing commands replaced by `<reference>`.
    pub references: usize,
}

/// Commands rendered as a bracketed citation or cross reference.
const BRACKET_CITES: &[&str] = &[
    "cite", "citep", "Citep", "parencite", "Parencite", "autocite", "Autocite", "footcite",
    "supercite", "citeyear", "citeyearpar", "citenum", "ref", "eqref", "autoref", "cref", "Cref",
    "pageref", "nameref", "vref",
];
/// Commands printing author names followed by a year in brackets.
const AUTHOR_YEAR_CITES: &[&str] = &[
    "citet", "Citet", "citealt", "Citealt", "citealp", "Citealp", "textcite", "Textcite",
];
/// Commands printing only author names.
const AUTHOR_ONLY_CITES: &[&str] = &["citeauthor", "Citeauthor"];

/// Commands whose arguments are kept as text.
const TEXT_WRAPPERS: &[&str] = &[
    "textbf", "textit", "emph", "texttt", "textsc", "textrm", "textsf", "textmd", "textup",
    "textsl", "textnormal", "underline", "uline", "mbox", "hbox", "text", "mathrm", "makebox",
    "fbox", "enquote", "textls",
];

/// Commands dropped together with all their immediately following arguments.
const DROP_WITH_ARGS: &[&str] = &[
    "label", "nocite", "footnote", "footnotetext", "thanks", "vspace", "hspace", "vskip",
    "hskip", "includegraphics", "bibliography", "bibliographystyle", "addbibresource",
    "usepackage", "documentclass", "input", "include", "url", "caption", "title", "author",
    "date", "affiliation", "affil", "email", "keywords", "newcommand", "renewcommand",
    "providecommand", "DeclareMathOperator", "newenvironment", "renewenvironment", "setlength",
    "addtolength", "setcounter", "addtocounter", "newtheorem", "color", "textcolor",
    "definecolor", "pagestyle", "thispagestyle", "hypersetup", "graphicspath", "acmConference",
    "icmltitle", "icmlauthor", "icmlaffiliation", "icmlcorrespondingauthor", "icmlkeywords",
    "linenumbers", "resizebox", "scalebox",
];

/// Sectioning levels removed together with their title.
const SUB_SECTIONS: &[&str] = &["subsection", "subsubsection", "paragraph", "subparagraph"];

const MATH_ENVS: &[&str] = &[
    "equation", "align", "alignat", "gather", "multline", "eqnarray", "displaymath", "math",
    "flalign", "split", "dmath", "IEEEeqnarray", "subequations",
];

const DROP_ENVS: &[&str] = &[
    "figure", "table", "tabular", "tabularx", "algorithm", "algorithmic", "algorithm2e",
    "lstlisting", "verbatim", "minted", "tikzpicture", "thebibliography", "wrapfigure",
    "subfigure", "comment", "filecontents", "longtable", "wraptable",
];

fn strip_star(name: &str) -> &str {
    name.strip_suffix('*').unwrap_or(name)
}

/// Removes `%` comments. Like TeX, a comment also swallows its line break and
/// the next line's leading blanks.
pub fn strip_comments(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    let mut lines = source.split('\n').peekable();
    let mut skip_leading = false;
    while let Some(line) = lines.next() {
        let line = if skip_leading { line.trim_start_matches([' ', '\t']) } else { line };
        match find_comment(line) {
            Some(cut) => {
                out.push_str(&line[..cut]);
                skip_leading = true;
            }
            None => {
                out.push_str(line);
                if lines.peek().is_some() {
                    out.push('\n');
                }
                skip_leading = false;
            }
        }
    }
    out
}

fn find_comment(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    let mut backslashes = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'\\' {
            backslashes += 1;
            continue;
        }
        if b == b'%' && backslashes % 2 == 0 {
            return Some(i);
        }
        backslashes = 0;
    }
    None
}

/// Restricts a full document to the part between `\begin{document}` and
/// `\end{document}`; sources without the markers are returned whole.
fn document_body(source: &str) -> &str {
    let start = source
        .find("\\begin{document}")
        .map(|i| i + "\\begin{document}".len())
        .unwrap_or(0);
    let rest = &source[start..];
    match rest.find("\\end{document}") {
        Some(end) => &rest[..end],
        None => rest,
    }
}

/// Converts LaTeX source to normalized plain text.
///
/// Author-producing citations draw a surname from `name_pool` with a
/// generator seeded by `seed`, in document order. An empty pool falls back
/// to the placeholder alone.
pub fn normalize_latex(source: &str, name_pool: &[String], seed: u64) -> NormalizeOutput {
    let stripped = strip_comments(source);
    let body = document_body(&stripped);
    let mut n = Normalizer {
        chars: body.chars().collect(),
        out: String::with_capacity(body.len()),
        names: name_pool,
        rng: ChaCha8Rng::seed_from_u64(seed),
        warnings: Vec::new(),
        references: 0,
    };
    let end = n.chars.len();
    n.run(0, end);
    NormalizeOutput {
        text: collapse_whitespace(&n.out),
        warnings: n.warnings,
        references: n.references,
    }
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for w in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

struct Normalizer<'a> {
    chars: Vec<char>,
    out: String,
    names: &'a [String],
    rng: ChaCha8Rng,
    warnings: Vec<NormalizeWarning>,
    references: usize,
}

impl Normalizer<'_> {
    fn at(&self, i: usize, end: usize) -> Option<char> {
        if i < end {
            self.chars.get(i).copied()
        } else {
            None
        }
    }

    fn starts_with(&self, i: usize, end: usize, pat: &str) -> bool {
        let mut j = i;
        for c in pat.chars() {
            if self.at(j, end) != Some(c) {
                return false;
            }
            j += 1;
        }
        true
    }

    fn find(&self, from: usize, end: usize, pat: &str) -> Option<usize> {
        (from..end).find(|&i| self.starts_with(i, end, pat))
    }

    fn run(&mut self, start: usize, end: usize) {
        let mut i = start;
        while i < end {
            let c = self.chars[i];
            i = match c {
                '\\' => self.command(i, end),
                '$' => self.dollar_math(i, end),
                '{' => i + 1,
                '}' => {
                    self.warnings.push(NormalizeWarning::UnbalancedBrace { offset: i });
                    i + 1
                }
                '~' => {
                    self.out.push(' ');
                    i + 1
                }
                '`' if self.at(i + 1, end) == Some('`') => {
                    self.out.push('"');
                    i + 2
                }
                '\'' if self.at(i + 1, end) == Some('\'') => {
                    self.out.push('"');
                    i + 2
                }
                c if c.is_whitespace() => {
                    self.out.push(' ');
                    i + 1
                }
                c => {
                    self.out.push(c);
                    i + 1
                }
            };
        }
    }

    fn emit_equation(&mut self) {
        self.out.push_str(EQUATION_TOKEN);
    }

    fn emit_reference(&mut self) {
        self.references += 1;
        self.out.push_str(REFERENCE_TOKEN);
    }

    fn draw_name(&mut self) -> Option<String> {
        if self.names.is_empty() {
            return None;
        }
        let k = self.rng.gen_range(0..self.names.len());
        Some(self.names[k].clone())
    }

    fn dollar_math(&mut self, i: usize, end: usize) -> usize {
        let (delim, open) = if self.at(i + 1, end) == Some('$') { ("$$", 2) } else { ("$", 1) };
        self.emit_equation();
        match self.find_unescaped(i + open, end, delim) {
            Some(close) => close + open,
            None => {
                self.warnings.push(NormalizeWarning::UnbalancedMath { offset: i });
                end
            }
        }
    }

    /// Position of `pat` at or after `from`, skipping backslash escapes.
    fn find_unescaped(&self, from: usize, end: usize, pat: &str) -> Option<usize> {
        let mut j = from;
        while j < end {
            if self.chars[j] == '\\' {
                j += 2;
                continue;
            }
            if self.starts_with(j, end, pat) {
                return Some(j);
            }
            j += 1;
        }
        None
    }

    /// Index one past the `}` matching the `{` at `open`, or `None`.
    fn group_end(&self, open: usize, end: usize) -> Option<usize> {
        let mut depth = 0usize;
        let mut j = open;
        while j < end {
            match self.chars[j] {
                '\\' => {
                    j += 2;
                    continue;
                }
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(j + 1);
                    }
                }
                _ => {}
            }
            j += 1;
        }
        None
    }

    /// Reads a `{...}` group at `i` (after optional blanks). Returns the inner
    /// range and the index after the group.
    fn mandatory(&mut self, i: usize, end: usize) -> Option<(usize, usize, usize)> {
        let mut j = i;
        while self.at(j, end).is_some_and(char::is_whitespace) {
            j += 1;
        }
        if self.at(j, end) != Some('{') {
            return None;
        }
        match self.group_end(j, end) {
            Some(after) => Some((j + 1, after - 1, after)),
            None => {
                self.warnings.push(NormalizeWarning::UnbalancedBrace { offset: j });
                Some((j + 1, end, end))
            }
        }
    }

    /// Skips `[...]` optional arguments directly following `i`.
    fn skip_optionals(&self, mut i: usize, end: usize) -> usize {
        loop {
            let mut j = i;
            while self.at(j, end).is_some_and(char::is_whitespace) {
                j += 1;
            }
            if self.at(j, end) != Some('[') {
                return i;
            }
            let mut depth = 0usize;
            let mut k = j;
            let mut closed = None;
            while k < end {
                match self.chars[k] {
                    '[' => depth += 1,
                    ']' => {
                        depth -= 1;
                        if depth == 0 {
                            closed = Some(k + 1);
                            break;
                        }
                    }
                    _ => {}
                }
                k += 1;
            }
            match closed {
                Some(after) => i = after,
                None => return i,
            }
        }
    }

    /// Skips every directly adjacent `[...]` / `{...}` argument.
    fn skip_all_args(&mut self, mut i: usize, end: usize) -> usize {
        loop {
            let after_opt = self.skip_optionals(i, end);
            match self.at(after_opt, end) {
                Some('{') => match self.mandatory(after_opt, end) {
                    Some((_, _, after)) => i = after,
                    None => return after_opt,
                },
                _ => return after_opt,
            }
        }
    }

    fn read_name(&self, i: usize, end: usize) -> (String, usize) {
        let mut j = i;
        while self.at(j, end).is_some_and(|c| c.is_ascii_alphabetic() || c == '@') {
            j += 1;
        }
        if self.at(j, end) == Some('*') {
            j += 1;
        }
        (self.chars[i..j].iter().collect(), j)
    }

    fn command(&mut self, i: usize, end: usize) -> usize {
        let Some(next) = self.at(i + 1, end) else {
            return i + 1;
        };
        if !next.is_ascii_alphabetic() {
            return self.symbol_command(i, next, end);
        }
        let (name, after_name) = self.read_name(i + 1, end);
        let base = strip_star(&name);
        if BRACKET_CITES.contains(&base) {
            let j = self.skip_optionals(after_name, end);
            let j = self.mandatory(j, end).map_or(j, |(_, _, a)| a);
            self.emit_reference();
            return j;
        }
        if AUTHOR_YEAR_CITES.contains(&base) || AUTHOR_ONLY_CITES.contains(&base) {
            let j = self.skip_optionals(after_name, end);
            let j = self.mandatory(j, end).map_or(j, |(_, _, a)| a);
            let name_drawn = self.draw_name();
            if let Some(surname) = &name_drawn {
                self.out.push_str(surname);
            }
            if AUTHOR_YEAR_CITES.contains(&base) || name_drawn.is_none() {
                if name_drawn.is_some() {
                    self.out.push(' ');
                }
                self.emit_reference();
            }
            return j;
        }
        if base == "section" {
            let j = self.skip_optionals(after_name, end);
            let Some((s, e, after)) = self.mandatory(j, end) else {
                return j;
            };
            let title = self.render(s, e);
            self.out.push_str(&format!(" \\{name}{{{}}} ", title.replace(['{', '}'], "")));
            return after;
        }
        if SUB_SECTIONS.contains(&base) || DROP_WITH_ARGS.contains(&base) {
            self.out.push(' ');
            return self.skip_all_args(after_name, end);
        }
        if base == "href" {
            let j = self.mandatory(after_name, end).map_or(after_name, |(_, _, a)| a);
            return match self.mandatory(j, end) {
                Some((s, e, after)) => {
                    self.run(s, e);
                    after
                }
                None => j,
            };
        }
        if base == "begin" {
            return self.begin_env(i, after_name, end);
        }
        if base == "end" {
            self.out.push(' ');
            return self.mandatory(after_name, end).map_or(after_name, |(_, _, a)| a);
        }
        if base == "item" {
            self.out.push(' ');
            return self.skip_optionals(after_name, end);
        }
        if TEXT_WRAPPERS.contains(&base) {
            let j = self.skip_optionals(after_name, end);
            return match self.mandatory(j, end) {
                Some((s, e, after)) => {
                    self.run(s, e);
                    after
                }
                None => j,
            };
        }
        // Unknown command: drop the name, keep the text of adjacent arguments.
        let mut j = self.skip_optionals(after_name, end);
        while self.at(j, end) == Some('{') {
            match self.mandatory(j, end) {
                Some((s, e, after)) => {
                    self.run(s, e);
                    j = after;
                }
                None => break,
            }
        }
        j
    }

    fn symbol_command(&mut self, i: usize, sym: char, end: usize) -> usize {
        match sym {
            '(' => self.delimited_math(i, end, "\\)"),
            '[' => self.delimited_math(i, end, "\\]"),
            '%' | '&' | '_' | '#' | '$' | '{' | '}' => {
                self.out.push(sym);
                i + 2
            }
            '\\' => {
                self.out.push(' ');
                self.skip_optionals(i + 2, end)
            }
            '\'' | '`' | '^' | '"' | '~' | '=' | '.' => {
                // Accent: keep the base letter only.
                let j = i + 2;
                match self.at(j, end) {
                    Some('{') => match self.mandatory(j, end) {
                        Some((s, e, after)) => {
                            self.run(s, e);
                            after
                        }
                        None => j,
                    },
                    _ => j,
                }
            }
            '-' | '/' => i + 2,
            _ => {
                self.out.push(' ');
                i + 2
            }
        }
    }

    fn delimited_math(&mut self, i: usize, end: usize, close: &str) -> usize {
        self.emit_equation();
        match self.find(i + 2, end, close) {
            Some(c) => c + close.len(),
            None => {
                self.warnings.push(NormalizeWarning::UnbalancedMath { offset: i });
                end
            }
        }
    }

    fn begin_env(&mut self, start: usize, after_name: usize, end: usize) -> usize {
        let Some((s, e, after)) = self.mandatory(after_name, end) else {
            return after_name;
        };
        let env: String = self.chars[s..e].iter().collect();
        let base = strip_star(env.trim()).to_string();
        let is_math = MATH_ENVS.contains(&base.as_str());
        if is_math || DROP_ENVS.contains(&base.as_str()) {
            let close = format!("\\end{{{}}}", env.trim());
            self.out.push(' ');
            if is_math {
                self.emit_equation();
                self.out.push(' ');
            }
            return match self.find_env_end(after, end, env.trim(), &close) {
                Some(c) => c + close.chars().count(),
                None => {
                    self.warnings.push(NormalizeWarning::UnterminatedEnvironment {
                        name: env.trim().to_string(),
                        offset: start,
                    });
                    end
                }
            };
        }
        self.out.push(' ');
        after
    }

    /// Finds the `\end{env}` matching a `\begin{env}`, honouring nesting of the same name.
    fn find_env_end(&self, from: usize, end: usize, env: &str, close: &str) -> Option<usize> {
        let open = format!("\\begin{{{env}}}");
        let mut depth = 1usize;
        let mut j = from;
        while j < end {
            if self.starts_with(j, end, &open) {
                depth += 1;
                j += open.chars().count();
                continue;
            }
            if self.starts_with(j, end, close) {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
                j += close.chars().count();
                continue;
            }
            j += 1;
        }
        None
    }

    /// Normalizes a sub-range into a standalone string (for titles).
    fn render(&mut self, s: usize, e: usize) -> String {
        let saved = std::mem::take(&mut self.out);
        self.run(s, e);
        let rendered = std::mem::replace(&mut self.out, saved);
        collapse_whitespace(&rendered)
    }
}
