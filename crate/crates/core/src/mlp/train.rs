use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{mix, Gradients};
use super::{BowVector, Head, LossKind, MlpError, MlpModel, Vocabulary, DEFAULT_MIN_COUNT};
use crate::Scalar;

pub const DEFAULT_HIDDEN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub learning_rate: T,
    pub dropout: T,
    pub weight_decay: T,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Label threshold for the multi-label head.
    pub lambda_threshold: T,
    pub hidden_width: usize,
    pub min_count: usize,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn regression() -> Self {
        TrainConfig {
            learning_rate: T::of(0.05),
            dropout: T::of(0.3),
            weight_decay: T::of(0.05),
            epochs: 10,
            batch_size: 64,
            seed: 0,
            lambda_threshold: T::of(0.2),
            hidden_width: DEFAULT_HIDDEN,
            min_count: DEFAULT_MIN_COUNT,
        }
    }

    pub fn multilabel() -> Self {
        TrainConfig {
            learning_rate: T::of(0.1),
            dropout: T::of(0.5),
            weight_decay: T::of(0.01),
            epochs: 100,
            ..Self::regression()
        }
    }

    pub fn for_head(head: Head) -> Self {
        match head {
            Head::Regression => Self::regression(),
            Head::Multilabel => Self::multilabel(),
        }
    }

    pub fn validate(&self) -> Result<(), MlpError> {
        let bad = |m: String| Err(MlpError::BadConfig(m));
        if !(self.learning_rate > T::zero()) || !self.learning_rate.is_finite() {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.dropout >= T::zero() && self.dropout < T::one()) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.weight_decay >= T::zero()) {
            return bad(format!("weight decay must be non-negative, got {}", self.weight_decay));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.hidden_width == 0 {
            return bad("hidden width must be at least 1".into());
        }
        if !(self.lambda_threshold > T::zero() && self.lambda_threshold < T::one()) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.lambda_threshold));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self::regression()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example<T> {
    pub features: BowVector<T>,
    pub targets: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: MlpModel<T>,
    /// Mean training loss per epoch (with dropout active).
    pub train_loss: Vec<T>,
    /// Inference-mode validation loss per epoch; empty without validation data.
    pub validation_loss: Vec<T>,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

struct AdamW<T> {
    m: [Vec<T>; 4],
    v: [Vec<T>; 4],
    step: i32,
}

impl<T: Scalar> AdamW<T> {
    fn new(model: &MlpModel<T>) -> Self {
        let zeros = |p: &[T]| vec![T::zero(); p.len()];
        let p = model.parameters();
        AdamW { m: p.map(zeros), v: p.map(zeros), step: 0 }
    }

    fn update(&mut self, model: &mut MlpModel<T>, grads: &Gradients<T>, lr: T, wd: T) {
        self.step += 1;
        let (b1, b2) = (T::of(BETA1), T::of(BETA2));
        let c1 = T::one() - b1.powi(self.step);
        let c2 = T::one() - b2.powi(self.step);
        let eps = T::of(EPS);
        let decay = T::one() - lr * wd;
        let blocks = [&grads.w1, &grads.b1, &grads.w2, &grads.b2];
        for (((p, g), m), v) in model.parameters_mut().into_iter().zip(blocks).zip(&mut self.m).zip(&mut self.v) {
            p.par_iter_mut()
                .zip(g.par_iter())
                .zip(m.par_iter_mut())
                .zip(v.par_iter_mut())
                .with_min_len(4096)
                .for_each(|(((p, &g), m), v)| {
                    *m = b1 * *m + (T::one() - b1) * g;
                    *v = b2 * *v + (T::one() - b2) * g * g;
                    *p *= decay;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
        }
    }
}

/// Mini-batch AdamW with decoupled weight decay. The configuration is taken
/// from the model. Fully determined by data order, config and seed.
pub fn train<T: Scalar>(
    mut model: MlpModel<T>,
    train: &[Example<T>],
    validation: &[Example<T>],
    loss: LossKind,
) -> Result<TrainOutcome<T>, MlpError> {
    let config = *model.config();
    config.validate()?;
    let head = model.head();
    if train.is_empty() {
        return Err(MlpError::NoExamples);
    }
    if head.default_loss() != loss {
        return Err(MlpError::LossMismatch { loss: loss.as_str(), head: head.as_str() });
    }
    let vocab_len = model.vocab().len();
    for (index, ex) in train.iter().chain(validation).enumerate() {
        if ex.targets.len() != head.outputs() {
            return Err(MlpError::TargetArity { index, got: ex.targets.len(), want: head.outputs(), head: head.as_str() });
        }
        if ex.features.max_index().is_some_and(|i| i >= vocab_len) {
            return Err(MlpError::Shape(format!("example {index} indexes past the vocabulary")));
        }
    }
    let dropout = config.dropout.as_f64();
    let lr_f64 = config.learning_rate.as_f64();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, 0x5eed));
    let mut optimizer = AdamW::new(&model);
    let mut grads = Gradients::zeros_like(&model);
    let validation_refs: Vec<&Example<T>> = validation.iter().collect();
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut validation_loss = Vec::new();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_total = T::zero();
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&Example<T>> = chunk.iter().map(|&i| &train[i]).collect();
            grads.clear();
            let batch_seed = mix(mix(config.seed, epoch as u64), b as u64);
            let value = model.loss_and_grad(&batch, loss, Some((dropout, batch_seed)), &mut grads);
            if !value.is_finite() {
                return Err(MlpError::NonFinite { epoch, batch: b, learning_rate: lr_f64 });
            }
            epoch_total += value * T::of_usize(batch.len());
            optimizer.update(&mut model, &grads, config.learning_rate, config.weight_decay);
        }
        let mean = epoch_total / T::of_usize(train.len());
        train_loss.push(mean);
        if model.parameters().iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(MlpError::NonFinite { epoch, batch: order.len() / config.batch_size, learning_rate: lr_f64 });
        }
        if !validation_refs.is_empty() {
            validation_loss.push(model.loss(&validation_refs, loss));
        }
    }
    Ok(TrainOutcome { model, train_loss, validation_loss })
}

/// Builds the vocabulary from the training texts, initialises a model and
/// trains it with the head's loss.
pub fn fit<T: Scalar, S: AsRef<str> + Sync>(
    train_set: &[(S, Vec<T>)],
    validation: &[(S, Vec<T>)],
    head: Head,
    config: TrainConfig<T>,
) -> Result<TrainOutcome<T>, MlpError> {
    config.validate()?;
    let texts: Vec<&str> = train_set.iter().map(|(t, _)| t.as_ref()).collect();
    let vocab = Vocabulary::build(&texts, config.min_count)?;
    let featurize = |set: &[(S, Vec<T>)]| -> Vec<Example<T>> {
        set.par_iter()
            .map(|(t, y)| Example { features: vocab.featurize(t.as_ref()), targets: y.clone() })
            .collect()
    };
    let (train_examples, validation_examples) = (featurize(train_set), featurize(validation));
    let model = MlpModel::init(vocab, head, config);
    train(model, &train_examples, &validation_examples, head.default_loss())
}
