//! Bag-of-words network with one wide hidden layer, a regression head for
//! scientificness and a seven-way multi-label head for sections.

mod model;
mod persist;
mod train;
mod vocab;

pub use model::{ForwardMode, Gradients, Head, LossKind, MlpModel, SectionPrediction};
pub use persist::{FORMAT_VERSION, MAGIC};
pub use train::{fit, train, Example, TrainConfig, TrainOutcome};
pub use vocab::{BowVector, Vocabulary, DEFAULT_MIN_COUNT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlpError {
    #[error("vocabulary is empty after dropping tokens seen fewer than {min_count} times")]
    EmptyVocabulary { min_count: usize },
    #[error("no training examples")]
    NoExamples,
    #[error("example {index} has {got} targets but the {head} head needs {want}")]
    TargetArity { index: usize, got: usize, want: usize, head: &'static str },
    #[error("{loss} loss does not fit the {head} head")]
    LossMismatch { loss: &'static str, head: &'static str },
    #[error("model has a {actual} head but this call needs a {expected} head")]
    WrongHead { expected: &'static str, actual: &'static str },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("loss became non-finite in epoch {epoch}, batch {batch}; lower the learning rate (currently {learning_rate})")]
    NonFinite { epoch: usize, batch: usize, learning_rate: f64 },
    #[error("inconsistent model: {0}")]
    Shape(String),
    #[error("model file, field `{field}`: {message}")]
    Format { field: &'static str, message: String },
    #[error("model file checksum mismatch (stored {stored}, computed {computed})")]
    Checksum { stored: String, computed: String },
    #[error("{0}")]
    Io(String),
}
