//! File helpers shared by the subcommands.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sciprose_core::corpus::{RawPaper, Rank};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Non-empty trimmed lines.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).with_context(|| format!("{}:{}: invalid record", path.display(), n + 1))?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[derive(Deserialize)]
struct TextOnly {
    text: String,
}

/// Sentences from a `.jsonl` file (any records with a `text` field) or from
/// a plain text file with one sentence per line.
pub fn read_sentences(path: &Path) -> Result<Vec<String>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        Ok(read_jsonl::<TextOnly>(path)?.into_iter().map(|t| t.text).collect())
    } else {
        read_lines(path)
    }
}

/// `paper_id<TAB>rank` lines.
pub fn read_ranks(path: &Path) -> Result<HashMap<String, Rank>> {
    let mut out = HashMap::new();
    for (n, line) in read_lines(path)?.iter().enumerate() {
        let Some((id, rank)) = line.split_once('\t') else {
            bail!("{}:{}: expected `paper_id<TAB>rank`", path.display(), n + 1);
        };
        let rank = rank.trim().parse().map_err(|e| anyhow::anyhow!("{}:{}: {e}", path.display(), n + 1))?;
        out.insert(id.trim().to_string(), rank);
    }
    Ok(out)
}

fn tex_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            tex_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "tex") {
            out.push(p);
        }
    }
    Ok(())
}

/// Papers under `dir`: every subdirectory is one paper (its `.tex` files
/// concatenated in path order) and every top-level `.tex` file is one paper.
/// The id is the directory name or file stem.
pub fn load_papers(dir: &Path, ranks: &HashMap<String, Rank>) -> Result<Vec<RawPaper>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    let mut papers = Vec::new();
    for path in entries {
        let (id, files) = if path.is_dir() {
            let mut files = Vec::new();
            tex_files(&path, &mut files)?;
            (path.file_name(), files)
        } else if path.extension().is_some_and(|e| e == "tex") {
            (path.file_stem(), vec![path.clone()])
        } else {
            continue;
        };
        if files.is_empty() {
            continue;
        }
        let id = id.map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut source = String::new();
        for f in &files {
            let bytes = fs::read(f).with_context(|| format!("reading {}", f.display()))?;
            source.push_str(&String::from_utf8_lossy(&bytes));
            source.push('\n');
        }
        let rank = ranks.get(&id).copied().unwrap_or_default();
        papers.push(RawPaper { paper_id: id, latex_source: source, rank });
    }
    Ok(papers)
}
