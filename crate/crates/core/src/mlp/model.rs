use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::train::{Example, TrainConfig};
use super::{BowVector, MlpError, Vocabulary};
use crate::corpus::CanonicalSection;
use crate::scalar::sigmoid;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Regression,
    Multilabel,
}

impl Head {
    pub fn outputs(self) -> usize {
        match self {
            Head::Regression => 1,
            Head::Multilabel => CanonicalSection::COUNT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Head::Regression => "regression",
            Head::Multilabel => "multilabel",
        }
    }

    pub fn default_loss(self) -> LossKind {
        match self {
            Head::Regression => LossKind::Mse,
            Head::Multilabel => LossKind::BinaryCrossEntropy,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Head::Regression => 0,
            Head::Multilabel => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Head> {
        match code {
            0 => Some(Head::Regression),
            1 => Some(Head::Multilabel),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Squared error of the squashed output, averaged over outputs and examples.
    Mse,
    /// Per-class binary cross-entropy, averaged over classes and examples.
    BinaryCrossEntropy,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::BinaryCrossEntropy => "binary cross-entropy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardMode {
    Inference,
    /// Inverted dropout on the hidden layer with the given rate.
    Train { dropout: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionPrediction<T> {
    pub labels: BTreeSet<CanonicalSection>,
    pub probabilities: Vec<T>,
}

/// Gradient buffers with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub w1: Vec<T>,
    pub b1: Vec<T>,
    pub w2: Vec<T>,
    pub b2: Vec<T>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(model: &MlpModel<T>) -> Self {
        Gradients {
            w1: vec![T::zero(); model.w1.len()],
            b1: vec![T::zero(); model.b1.len()],
            w2: vec![T::zero(); model.w2.len()],
            b2: vec![T::zero(); model.b2.len()],
        }
    }

    pub fn clear(&mut self) {
        for buf in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            buf.iter_mut().for_each(|g| *g = T::zero());
        }
    }
}

/// `y = squash(W2 · rect(W1 · x + b1) + b2)`. `W1` is hidden × vocab and
/// `W2` outputs × hidden, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    vocab: Vocabulary,
    head: Head,
    hidden: usize,
    pub(crate) w1: Vec<T>,
    pub(crate) b1: Vec<T>,
    pub(crate) w2: Vec<T>,
    pub(crate) b2: Vec<T>,
    config: TrainConfig<T>,
}

struct Trace<T> {
    hidden: Vec<T>,
    /// d(hidden)/d(pre-activation): 0 where rectified or dropped, else the dropout scale.
    gate: Vec<T>,
    logits: Vec<T>,
}

impl<T: Scalar> MlpModel<T> {
    /// Uniform initialisation in ±1/sqrt(fan_in), seeded by `config.seed`.
    pub fn init(vocab: Vocabulary, head: Head, config: TrainConfig<T>) -> Self {
        let hidden = config.hidden_width;
        let (v, out) = (vocab.len(), head.outputs());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut uniform = |n: usize, fan_in: usize| -> Vec<T> {
            let bound = 1.0 / (fan_in as f64).sqrt();
            (0..n).map(|_| T::of(rng.gen_range(-bound..bound))).collect()
        };
        let w1 = uniform(hidden * v, v);
        let b1 = uniform(hidden, v);
        let w2 = uniform(out * hidden, hidden);
        let b2 = uniform(out, hidden);
        MlpModel { vocab, head, hidden, w1, b1, w2, b2, config }
    }

    pub fn from_parts(
        vocab: Vocabulary,
        head: Head,
        w1: Vec<T>,
        b1: Vec<T>,
        w2: Vec<T>,
        b2: Vec<T>,
        config: TrainConfig<T>,
    ) -> Result<Self, MlpError> {
        let hidden = b1.len();
        let (v, out) = (vocab.len(), head.outputs());
        let checks = [("W1", w1.len(), hidden * v), ("W2", w2.len(), out * hidden), ("b2", b2.len(), out)];
        for (name, got, want) in checks {
            if got != want {
                return Err(MlpError::Shape(format!("{name} has {got} entries, expected {want}")));
            }
        }
        if hidden == 0 {
            return Err(MlpError::Shape("hidden width is zero".into()));
        }
        if [&w1, &b1, &w2, &b2].iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(MlpError::Shape("non-finite parameter".into()));
        }
        let config = TrainConfig { hidden_width: hidden, ..config };
        Ok(MlpModel { vocab, head, hidden, w1, b1, w2, b2, config })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden
    }

    pub fn config(&self) -> &TrainConfig<T> {
        &self.config
    }

    /// Parameter blocks in the order W1, b1, W2, b2.
    pub fn parameters(&self) -> [&[T]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn parameters_mut(&mut self) -> [&mut Vec<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn featurize(&self, text: &str) -> BowVector<T> {
        self.vocab.featurize(text)
    }

    fn trace(&self, x: &BowVector<T>, mode: ForwardMode) -> Trace<T> {
        let v = self.vocab.len();
        let mut hidden = self.b1.clone();
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &self.w1[j * v..(j + 1) * v];
            for &(i, xi) in x.entries() {
                *h += row[i] * xi;
            }
        }
        let mut gate = vec![T::zero(); self.hidden];
        match mode {
            ForwardMode::Inference => {
                for (g, h) in gate.iter_mut().zip(&hidden) {
                    if *h > T::zero() {
                        *g = T::one();
                    }
                }
            }
            ForwardMode::Train { dropout, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scale = T::one() / T::of(1.0 - dropout);
                for (g, h) in gate.iter_mut().zip(&hidden) {
                    let keep = dropout == 0.0 || rng.gen::<f64>() >= dropout;
                    if keep && *h > T::zero() {
                        *g = scale;
                    }
                }
            }
        }
        for (h, g) in hidden.iter_mut().zip(&gate) {
            *h *= *g;
        }
        let logits = (0..self.head.outputs())
            .map(|k| {
                let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
                row.iter().zip(&hidden).fold(self.b2[k], |acc, (w, h)| acc + *w * *h)
            })
            .collect();
        Trace { hidden, gate, logits }
    }

    /// Hidden activations after rectification (and dropout in train mode).
    pub fn hidden_activations(&self, x: &BowVector<T>, mode: ForwardMode) -> Vec<T> {
        self.trace(x, mode).hidden
    }

    pub fn forward(&self, x: &BowVector<T>, mode: ForwardMode) -> Vec<T> {
        self.trace(x, mode).logits.into_iter().map(sigmoid).collect()
    }

    /// Mean loss over the batch and the gradient of that mean, accumulated
    /// into `grads` (which the caller clears). `dropout` is `(rate, seed)`;
    /// example `i` of the batch draws its mask from a seed derived from both.
    pub fn loss_and_grad(
        &self,
        batch: &[&Example<T>],
        loss: LossKind,
        dropout: Option<(f64, u64)>,
        grads: &mut Gradients<T>,
    ) -> T {
        let out = self.head.outputs();
        let v = self.vocab.len();
        let denom = T::of_usize(batch.len() * out);
        let mut total = T::zero();
        let mut d_hidden = vec![T::zero(); self.hidden];
        for (n, ex) in batch.iter().enumerate() {
            let mode = match dropout {
                Some((rate, seed)) if rate > 0.0 => ForwardMode::Train { dropout: rate, seed: mix(seed, n as u64) },
                _ => ForwardMode::Inference,
            };
            let tr = self.trace(&ex.features, mode);
            d_hidden.iter_mut().for_each(|d| *d = T::zero());
            for k in 0..out {
                let z = tr.logits[k];
                let t = ex.targets[k];
                let (value, dz) = match loss {
                    LossKind::Mse => {
                        let y = sigmoid(z);
                        let e = y - t;
                        (e * e, T::of(2.0) * e * y * (T::one() - y))
                    }
                    LossKind::BinaryCrossEntropy => {
                        // softplus(z) - t z, computed without overflow
                        let sp = z.max(T::zero()) + (-z.abs()).exp().ln_1p();
                        (sp - t * z, sigmoid(z) - t)
                    }
                };
                total += value;
                let dz = dz / denom;
                grads.b2[k] += dz;
                let row = k * self.hidden;
                for j in 0..self.hidden {
                    grads.w2[row + j] += dz * tr.hidden[j];
                    d_hidden[j] += dz * self.w2[row + j];
                }
            }
            for j in 0..self.hidden {
                let g = d_hidden[j] * tr.gate[j];
                if g == T::zero() {
                    continue;
                }
                grads.b1[j] += g;
                let row = j * v;
                for &(i, xi) in ex.features.entries() {
                    grads.w1[row + i] += g * xi;
                }
            }
        }
        total / denom
    }

    pub fn loss(&self, examples: &[&Example<T>], loss: LossKind) -> T {
        let out = self.head.outputs();
        let mut total = T::zero();
        for ex in examples {
            let y = self.forward(&ex.features, ForwardMode::Inference);
            for k in 0..out {
                let t = ex.targets[k];
                total += match loss {
                    LossKind::Mse => (y[k] - t) * (y[k] - t),
                    LossKind::BinaryCrossEntropy => {
                        let eps = T::of(1e-12);
                        -(t * (y[k].max(eps)).ln() + (T::one() - t) * ((T::one() - y[k]).max(eps)).ln())
                    }
                };
            }
        }
        total / T::of_usize(examples.len() * out)
    }

    pub fn predict_score(&self, text: &str) -> Result<T, MlpError> {
        if self.head != Head::Regression {
            return Err(MlpError::WrongHead { expected: "regression", actual: self.head.as_str() });
        }
        Ok(self.forward(&self.featurize(text), ForwardMode::Inference)[0])
    }

    /// Probabilities for every section, and the sections whose probability
    /// exceeds `lambda`.
    pub fn predict_sections(&self, text: &str, lambda: T) -> Result<SectionPrediction<T>, MlpError> {
        if self.head != Head::Multilabel {
            return Err(MlpError::WrongHead { expected: "multilabel", actual: self.head.as_str() });
        }
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(MlpError::BadConfig(format!("threshold {lambda} is outside (0, 1)")));
        }
        let probabilities = self.forward(&self.featurize(text), ForwardMode::Inference);
        Ok(SectionPrediction { labels: labels_above(&probabilities, lambda), probabilities })
    }
}

pub(crate) fn labels_above<T: Scalar>(probabilities: &[T], lambda: T) -> BTreeSet<CanonicalSection> {
    probabilities
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > lambda)
        .filter_map(|(i, _)| CanonicalSection::from_index(i))
        .collect()
}

pub(crate) fn mix(seed: u64, n: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ n.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
