//! Task datasets: splits, scientificness examples, section contexts and
//! corrupted parallel pairs.

mod bucket;
mod context;
mod corrupt;
mod score;
mod split;

use thiserror::Error;

pub use bucket::{bucketize, Bucket, ParallelPair};
pub use context::{assemble_context, build_context_examples, ContextMode, SectionExample, DEFAULT_MAX_WORDS};
pub use corrupt::{
    apply_ops, corrupt_sentence_idm, make_idm_pair, strip_mask_brackets, Corruption, CorruptionOp,
    OpKind, OracleError, SubstitutionOracle, UnigramOracle,
};
pub use score::{
    build_score_dataset, inject_tokens, Origin, ScoreExample, NONSCIENTIFIC_TARGET, SCIENTIFIC_TARGET,
};
pub use split::{make_splits, split_records, SplitSpec, Splits};

#[derive(Debug, Error, PartialEq)]
pub enum ForgeError {
    #[error("split ratios must be positive and sum to 1, got {train}/{validate}/{test}")]
    BadRatios { train: f64, validate: f64, test: f64 },
    #[error("need at least 3 records to split, got {0}")]
    TooFewRecords(usize),
    #[error("corruption needs at least 4 tokens, got {0}")]
    TooFewTokens(usize),
    #[error("corruption rate must be finite and non-negative, got {0}")]
    BadRate(f64),
    #[error("op {index} ({kind:?} at {position}) is invalid for a sequence of {len} tokens")]
    InvalidOp { index: usize, kind: OpKind, position: usize, len: usize },
    #[error("substitution oracle and unigram fallback both failed: {0}")]
    OracleExhausted(String),
}
