//! Subcommands. Each prints a JSON summary on success.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sciprose_core::corpus::{ingest_corpus, paper_seed, IngestOutput, SectionTitleMapping, SentenceRecord};
use sciprose_core::forge::{
    assemble_context, build_context_examples, make_idm_pair, make_splits, split_records, ContextMode, Origin,
    ParallelPair, ScoreExample, SectionExample, SplitSpec, SubstitutionOracle, UnigramOracle, DEFAULT_MAX_WORDS,
};
use sciprose_core::metrics::{evaluate_pairs, sample_f1, Grouping, MetricKind, MetricResources, SynonymTable};
use sciprose_core::mlp::{fit, Head};
use sciprose_core::{CanonicalSection, EmbeddingTable, Model, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ServiceConfig;
use crate::io::{load_papers, read_jsonl, read_lines, read_ranks, read_sentences, write_json, write_jsonl};
use crate::proxy::EndpointOracle;
use crate::server::{self, AppState};

#[derive(Debug, Parser)]
#[command(name = "sciprose", version, about = "Scientific-writing corpus, model and evaluation tools")]
pub struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract filtered, section-labelled sentences from LaTeX papers.
    Ingest(IngestArgs),
    /// Filter statistics for a LaTeX corpus without writing records.
    Stats(CorpusArgs),
    /// Paper-level train/validate/test split of sentence records.
    Split(SplitArgs),
    /// Train the scientificness regression model.
    TrainScore(TrainScoreArgs),
    /// Train the multi-label section classifier.
    TrainSections(TrainSectionsArgs),
    /// Build a corrupted parallel corpus with insert/delete/modify edits.
    Corrupt(CorruptArgs),
    /// Build section-classification examples with context windows.
    Contexts(ContextsArgs),
    /// Score paraphraser outputs against a parallel corpus.
    Evaluate(EvalArgs),
    /// Per-bucket metrics with the identity baseline.
    BucketReport(EvalArgs),
    /// Scientificness scores for sentences.
    Score(ScoreArgs),
    /// Section labels for a sequence of sentences.
    Classify(ClassifyArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Directory of papers: one subdirectory or one `.tex` file per paper.
    #[arg(long)]
    pub input: PathBuf,
    /// `paper_id<TAB>rank` lines.
    #[arg(long)]
    pub ranks: Option<PathBuf>,
    /// Section-title mapping (`pattern<TAB>class[,class]`); the built-in table if absent.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Surnames used for author-year citations, one per line.
    #[arg(long)]
    pub names: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the summary (filter report and issues) here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "0.7,0.2,0.1")]
    pub ratios: String,
}

#[derive(Debug, Args, Default, Clone)]
pub struct HyperArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub min_count: Option<usize>,
}

impl HyperArgs {
    pub fn apply(&self, mut c: TrainConfig, seed: u64) -> TrainConfig {
        c.seed = seed;
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.dropout {
            c.dropout = v;
        }
        if let Some(v) = self.weight_decay {
            c.weight_decay = v;
        }
        if let Some(v) = self.hidden {
            c.hidden_width = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.min_count {
            c.min_count = v;
        }
        c
    }
}

#[derive(Debug, Args)]
pub struct TrainScoreArgs {
    /// Scientific sentences: records `.jsonl` or one sentence per line.
    #[arg(long)]
    pub scientific: PathBuf,
    /// Non-scientific sentences: `.jsonl` with `text` and `origin`, or one per line.
    #[arg(long)]
    pub nonscientific: PathBuf,
    /// Origin tag for plain-text non-scientific input.
    #[arg(long, default_value = "books")]
    pub origin: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the held-out test examples here.
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct TrainSectionsArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Context used for training: 1, 2 or 3 sentences.
    #[arg(long, default_value_t = 1)]
    pub context: u8,
    /// Context used for the test evaluation; defaults to the training one.
    #[arg(long)]
    pub eval_context: Option<u8>,
    #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
    pub max_words: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Sentences: records `.jsonl` or one per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rate: f64,
    /// `unigram` or `endpoint:URL`.
    #[arg(long, default_value = "unigram")]
    pub oracle: String,
    /// Texts for the unigram table; the input itself if absent.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write each pair's edit log here.
    #[arg(long)]
    pub ops: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ContextsArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub mode: u8,
    #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
    pub max_words: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Parallel pairs `.jsonl`.
    #[arg(long)]
    pub pairs: PathBuf,
    /// One system output per line, aligned with the pairs.
    #[arg(long)]
    pub outputs: PathBuf,
    /// Comma list of bleu, meteor, wer, sbleu, embed:TABLE.
    #[arg(long, default_value = "bleu,meteor,wer,sbleu")]
    pub metrics: String,
    /// Synonym groups for METEOR, one whitespace-separated group per line.
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long)]
    pub report: PathBuf,
    /// Name recorded as the model in the report.
    #[arg(long, default_value = "")]
    pub model_name: String,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Also score each sentence with placeholder tokens inserted and report the shift.
    #[arg(long)]
    pub inject_tokens: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Sentences in document order.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub context: u8,
    #[arg(long, default_value_t = DEFAULT_MAX_WORDS)]
    pub max_words: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub listen: Option<std::net::SocketAddr>,
}

pub fn run(cli: Cli) -> Result<Value> {
    let seed = cli.seed;
    match cli.command {
        Command::Ingest(a) => ingest(a, seed),
        Command::Stats(a) => stats(a, seed),
        Command::Split(a) => split(a, seed),
        Command::TrainScore(a) => train_score(a, seed),
        Command::TrainSections(a) => train_sections(a, seed),
        Command::Corrupt(a) => corrupt(a, seed),
        Command::Contexts(a) => contexts(a),
        Command::Evaluate(a) => evaluate(a, Grouping::All),
        Command::BucketReport(a) => evaluate(a, Grouping::ByBucket),
        Command::Score(a) => score(a, seed),
        Command::Classify(a) => classify(a),
        Command::Serve(a) => serve(a),
    }
}

fn mode(m: u8) -> Result<ContextMode> {
    ContextMode::try_from(m).map_err(anyhow::Error::msg)
}

pub fn run_ingest(corpus: &CorpusArgs, seed: u64) -> Result<IngestOutput> {
    let ranks = match &corpus.ranks {
        Some(p) => read_ranks(p)?,
        None => Default::default(),
    };
    let mapping = match &corpus.mapping {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SectionTitleMapping::parse(&text).with_context(|| format!("invalid mapping file {}", p.display()))?
        }
        None => SectionTitleMapping::builtin(),
    };
    let names = match &corpus.names {
        Some(p) => read_lines(p)?,
        None => Vec::new(),
    };
    let papers = load_papers(&corpus.input, &ranks)?;
    if papers.is_empty() {
        bail!("no .tex files found under {}", corpus.input.display());
    }
    Ok(ingest_corpus(&papers, &mapping, &names, seed))
}

fn ingest_summary(out: &IngestOutput) -> Value {
    let mut by_section: BTreeMap<&str, usize> = BTreeMap::new();
    let mut by_rank: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &out.records {
        for s in &r.sections {
            *by_section.entry(s.as_str()).or_default() += 1;
        }
        *by_rank.entry(r.rank.as_str()).or_default() += 1;
    }
    json!({
        "papers_total": out.papers_total,
        "papers_used": out.papers_used,
        "records": out.records.len(),
        "filter_report": out.report,
        "issues": out.issues,
        "by_section": by_section,
        "by_rank": by_rank,
    })
}

fn ingest(a: IngestArgs, seed: u64) -> Result<Value> {
    let out = run_ingest(&a.corpus, seed)?;
    write_jsonl(&a.out, &out.records)?;
    let summary = ingest_summary(&out);
    if let Some(p) = &a.report {
        write_json(p, &summary)?;
    }
    Ok(summary)
}

fn stats(a: CorpusArgs, seed: u64) -> Result<Value> {
    Ok(ingest_summary(&run_ingest(&a, seed)?))
}

fn parse_ratios(s: &str, seed: u64) -> Result<SplitSpec> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("ratios must be three numbers, got {s:?}"))?;
    let [train, validate, test] = parts[..] else {
        bail!("ratios must be three numbers, got {s:?}");
    };
    Ok(SplitSpec::new(train, validate, test, seed)?)
}

fn sort_records(records: &mut [SentenceRecord]) {
    records.sort_by(|a, b| {
        (&a.paper_id, a.section_index, a.sentence_index).cmp(&(&b.paper_id, b.section_index, b.sentence_index))
    });
}

fn split(a: SplitArgs, seed: u64) -> Result<Value> {
    let spec = parse_ratios(&a.ratios, seed)?;
    let records: Vec<SentenceRecord> = read_jsonl(&a.records)?;
    let mut s = split_records(&records, &spec)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (name, part) in [("train", &mut s.train), ("validate", &mut s.validate), ("test", &mut s.test)] {
        sort_records(part);
        write_jsonl(&a.out_dir.join(format!("{name}.jsonl")), part)?;
    }
    let (train, validate, test) = s.sizes();
    Ok(json!({"train": train, "validate": validate, "test": test, "out_dir": a.out_dir}))
}

#[derive(Deserialize)]
struct OriginLine {
    text: String,
    #[serde(default)]
    origin: Option<Origin>,
}

fn train_score(a: TrainScoreArgs, seed: u64) -> Result<Value> {
    let default_origin: Origin = a.origin.parse().map_err(anyhow::Error::msg)?;
    if default_origin == Origin::Arxiv {
        bail!("the non-scientific origin cannot be arxiv");
    }
    let mut examples: Vec<ScoreExample> =
        read_sentences(&a.scientific)?.into_iter().map(|t| ScoreExample::new(t, Origin::Arxiv)).collect();
    let nonsci: Vec<(String, Origin)> = if a.nonscientific.extension().is_some_and(|e| e == "jsonl") {
        read_jsonl::<OriginLine>(&a.nonscientific)?
            .into_iter()
            .map(|l| (l.text, l.origin.unwrap_or(default_origin)))
            .collect()
    } else {
        read_lines(&a.nonscientific)?.into_iter().map(|t| (t, default_origin)).collect()
    };
    examples.extend(nonsci.into_iter().map(|(t, o)| ScoreExample::new(t, o)));
    let splits = make_splits(&examples, &SplitSpec::with_seed(seed), |e| e.text.as_str())?;
    let to_pairs = |xs: &[ScoreExample]| xs.iter().map(|e| (e.text.clone(), vec![e.target])).collect::<Vec<_>>();
    let config = a.hyper.apply(TrainConfig::regression(), seed);
    let outcome = fit(&to_pairs(&splits.train), &to_pairs(&splits.validate), Head::Regression, config)?;
    let model = outcome.model;
    model.save(&a.out)?;
    if let Some(p) = &a.test_out {
        write_jsonl(p, &splits.test)?;
    }
    let test = score_summary(&model, &splits.test)?;
    Ok(json!({
        "model": a.out,
        "checksum": model.checksum(),
        "vocab_size": model.vocab().len(),
        "sizes": {"train": splits.train.len(), "validate": splits.validate.len(), "test": splits.test.len()},
        "train_loss": outcome.train_loss,
        "validation_loss": outcome.validation_loss,
        "test": test,
        "config": model.config(),
    }))
}

/// MSE and per-origin means. MSE is given raw and multiplied by 100, since
/// results are often quoted as a percentage.
fn score_summary(model: &Model, examples: &[ScoreExample]) -> Result<Value> {
    if examples.is_empty() {
        return Ok(Value::Null);
    }
    let mut predictions = Vec::with_capacity(examples.len());
    let mut by_origin: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for e in examples {
        let p = model.predict_score(&e.text)?;
        predictions.push(p);
        let slot = by_origin.entry(e.origin.as_str()).or_default();
        slot.0 += p;
        slot.1 += 1;
    }
    let targets: Vec<f64> = examples.iter().map(|e| e.target).collect();
    let mse = sciprose_core::metrics::mse(&predictions, &targets)?;
    let means: BTreeMap<&str, f64> = by_origin.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
    Ok(json!({"count": examples.len(), "mse": mse, "mse_times_100": mse * 100.0, "mean_score_by_origin": means}))
}

fn section_pairs(examples: &[SectionExample]) -> Vec<(String, Vec<f64>)> {
    examples
        .iter()
        .map(|e| {
            let mut y = vec![0.0; CanonicalSection::COUNT];
            for l in &e.labels {
                y[l.index()] = 1.0;
            }
            (e.context_text.clone(), y)
        })
        .collect()
}

/// Sample-based F1 of `model` on `examples` at threshold `lambda`.
pub fn section_f1(model: &Model, examples: &[SectionExample], lambda: f64) -> Result<f64> {
    let mut predicted = Vec::with_capacity(examples.len());
    let mut gold = Vec::with_capacity(examples.len());
    for e in examples {
        predicted.push(model.predict_sections(&e.context_text, lambda)?.labels);
        gold.push(e.labels.clone());
    }
    Ok(sample_f1(&predicted, &gold)?)
}

fn train_sections(a: TrainSectionsArgs, seed: u64) -> Result<Value> {
    let train_mode = mode(a.context)?;
    let eval_mode = mode(a.eval_context.unwrap_or(a.context))?;
    let records: Vec<SentenceRecord> = read_jsonl(&a.records)?;
    let mut s = split_records(&records, &SplitSpec::with_seed(seed))?;
    for part in [&mut s.train, &mut s.validate, &mut s.test] {
        sort_records(part);
    }
    let train = build_context_examples(&s.train, train_mode, a.max_words);
    let validate = build_context_examples(&s.validate, train_mode, a.max_words);
    let mut config = a.hyper.apply(TrainConfig::multilabel(), seed);
    if let Some(l) = a.lambda {
        config.lambda_threshold = l;
    }
    let outcome = fit(&section_pairs(&train), &section_pairs(&validate), Head::Multilabel, config)?;
    let model = outcome.model;
    model.save(&a.out)?;
    let lambda = model.config().lambda_threshold;
    let mut by_mode = BTreeMap::new();
    for m in [ContextMode::Single, ContextMode::WithPredecessor, ContextMode::WithNeighbors] {
        let test = build_context_examples(&s.test, m, a.max_words);
        if !test.is_empty() {
            by_mode.insert(m.as_u8().to_string(), section_f1(&model, &test, lambda)?);
        }
    }
    Ok(json!({
        "model": a.out,
        "checksum": model.checksum(),
        "vocab_size": model.vocab().len(),
        "sizes": {"train": train.len(), "validate": validate.len(), "test_records": s.test.len()},
        "train_context": train_mode.as_u8(),
        "eval_context": eval_mode.as_u8(),
        "test_f1": by_mode.get(&eval_mode.as_u8().to_string()),
        "test_f1_by_context": by_mode,
        "train_loss": outcome.train_loss,
        "validation_loss": outcome.validation_loss,
        "config": model.config(),
    }))
}

#[derive(Serialize)]
struct OpLog<'a> {
    index: usize,
    original: &'a str,
    ops: &'a [sciprose_core::forge::CorruptionOp],
    warnings: &'a [String],
}

fn corrupt(a: CorruptArgs, seed: u64) -> Result<Value> {
    if !(0.0..=0.5).contains(&a.rate) {
        bail!("rate must lie in [0, 0.5], got {}", a.rate);
    }
    let sentences = read_sentences(&a.input)?;
    let vocab_texts = match &a.vocab {
        Some(p) => read_sentences(p)?,
        None => sentences.clone(),
    };
    let mut fallback = UnigramOracle::from_texts(vocab_texts.iter().map(String::as_str));
    let mut endpoint = match a.oracle.as_str() {
        "unigram" => None,
        spec => match spec.strip_prefix("endpoint:") {
            Some(url) => Some(EndpointOracle::new(url, Duration::from_secs(10))?),
            None => bail!("--oracle must be `unigram` or `endpoint:URL`, got {spec:?}"),
        },
    };
    let mut unigram = fallback.clone();
    let mut pairs: Vec<ParallelPair> = Vec::with_capacity(sentences.len());
    let mut logs = Vec::with_capacity(sentences.len());
    let mut fallbacks = 0;
    for (i, s) in sentences.iter().enumerate() {
        let pair_seed = paper_seed(seed, &i.to_string());
        let (pair, corruption) = match endpoint.as_mut() {
            Some(e) => make_idm_pair(s, a.rate, e as &mut dyn SubstitutionOracle, &mut fallback, pair_seed)?,
            None => make_idm_pair(s, a.rate, &mut unigram, &mut fallback, pair_seed)?,
        };
        fallbacks += corruption.warnings.len();
        pairs.push(pair);
        logs.push((i, s.as_str(), corruption));
    }
    write_jsonl(&a.out, &pairs)?;
    if let Some(p) = &a.ops {
        let entries: Vec<OpLog> = logs
            .iter()
            .map(|(i, s, c)| OpLog { index: *i, original: s, ops: &c.ops, warnings: &c.warnings })
            .collect();
        write_jsonl(p, &entries)?;
    }
    let mut buckets: BTreeMap<String, usize> = BTreeMap::new();
    for p in &pairs {
        *buckets.entry(p.bucket.to_string()).or_default() += 1;
    }
    Ok(json!({"pairs": pairs.len(), "rate": a.rate, "buckets": buckets, "oracle_fallbacks": fallbacks, "out": a.out}))
}

fn contexts(a: ContextsArgs) -> Result<Value> {
    let m = mode(a.mode)?;
    let mut records: Vec<SentenceRecord> = read_jsonl(&a.records)?;
    sort_records(&mut records);
    let examples = build_context_examples(&records, m, a.max_words);
    write_jsonl(&a.out, &examples)?;
    Ok(json!({"examples": examples.len(), "mode": m.as_u8(), "out": a.out}))
}

/// Lines of `path` kept one-to-one (empty lines are empty outputs); a final
/// newline does not add an entry.
fn read_aligned_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(|l| l.trim().to_string()).collect())
}

fn evaluate(a: EvalArgs, grouping: Grouping) -> Result<Value> {
    let pairs: Vec<ParallelPair> = read_jsonl(&a.pairs)?;
    let outputs = read_aligned_lines(&a.outputs)?;
    let (kinds, table) = MetricKind::parse_list(&a.metrics)?;
    let mut resources = MetricResources::default();
    if let Some(p) = table {
        let text = std::fs::read_to_string(&p).with_context(|| format!("reading embedding table {p}"))?;
        resources.embeddings = Some(EmbeddingTable::parse(&text).with_context(|| format!("invalid embedding table {p}"))?);
    }
    if let Some(p) = &a.synonyms {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        resources.synonyms = Some(SynonymTable::parse(&text));
    }
    let mut report = evaluate_pairs(&pairs, &outputs, &kinds, &resources, grouping)
        .with_context(|| format!("{} pairs vs {} output lines", pairs.len(), outputs.len()))?;
    report.dataset = a.pairs.display().to_string();
    report.model = a.model_name.clone();
    report.timestamp = chrono::Utc::now().to_rfc3339();
    write_json(&a.report, &report)?;
    Ok(json!({"report": a.report, "rows": report.rows.len(), "notes": report.notes}))
}

fn score(a: ScoreArgs, seed: u64) -> Result<Value> {
    let model = Model::load(&a.model)?;
    let sentences = read_sentences(&a.input)?;
    if sentences.is_empty() {
        bail!("{} holds no sentences", a.input.display());
    }
    #[derive(Serialize)]
    struct Row<'a> {
        text: &'a str,
        score: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        modified: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        modified_score: Option<f64>,
    }
    let mut rows = Vec::with_capacity(sentences.len());
    for (i, s) in sentences.iter().enumerate() {
        let score = model.predict_score(s)?;
        let (modified, modified_score) = if a.inject_tokens {
            let m = sciprose_core::forge::inject_tokens(s, paper_seed(seed, &i.to_string()));
            let ms = model.predict_score(&m)?;
            (Some(m), Some(ms))
        } else {
            (None, None)
        };
        rows.push(Row { text: s, score, modified, modified_score });
    }
    if let Some(p) = &a.out {
        write_jsonl(p, &rows)?;
    }
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.score).sum::<f64>() / n;
    let mut summary = json!({"count": rows.len(), "mean_score": mean, "checksum": model.checksum()});
    if a.inject_tokens {
        let mean_mod = rows.iter().filter_map(|r| r.modified_score).sum::<f64>() / n;
        summary["mean_modified_score"] = json!(mean_mod);
        summary["mean_shift"] = json!(mean_mod - mean);
    }
    Ok(summary)
}

fn classify(a: ClassifyArgs) -> Result<Value> {
    let model = Model::load(&a.model)?;
    let m = mode(a.context)?;
    let lambda = a.lambda.unwrap_or(model.config().lambda_threshold);
    let sentences = read_sentences(&a.input)?;
    #[derive(Serialize)]
    struct Row<'a> {
        text: &'a str,
        labels: Vec<CanonicalSection>,
        probabilities: Vec<f64>,
    }
    let mut rows = Vec::with_capacity(sentences.len());
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, s) in sentences.iter().enumerate() {
        let context = assemble_context(&sentences, i, m, a.max_words);
        let p = model.predict_sections(&context, lambda)?;
        for l in &p.labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        rows.push(Row { text: s, labels: p.labels.into_iter().collect(), probabilities: p.probabilities });
    }
    if let Some(p) = &a.out {
        write_jsonl(p, &rows)?;
    }
    Ok(json!({"count": rows.len(), "lambda": lambda, "context": m.as_u8(), "label_counts": counts, "checksum": model.checksum()}))
}

fn serve(a: ServeArgs) -> Result<Value> {
    let mut config = match &a.config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    config = config.apply_env(|k| std::env::var(k).ok())?;
    if let Some(addr) = a.listen {
        config.listen = addr;
    }
    let state = Arc::new(AppState::from_config(config)?);
    let checksums = state.models().checksums.clone();
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::run(state))?;
    Ok(json!({"stopped": true, "models": checksums}))
}
