use std::collections::HashMap;

use super::MetricError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    /// Add one to numerator and denominator of the precisions for n >= 2.
    AddOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BleuConfig {
    pub max_n: usize,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self { max_n: 4, smoothing: Smoothing::AddOne }
    }
}

impl BleuConfig {
    /// Name used in reports.
    pub fn variant(&self) -> String {
        match self.smoothing {
            Smoothing::None => format!("sentence BLEU-{}, unsmoothed", self.max_n),
            Smoothing::AddOne => format!("sentence BLEU-{}, add-one smoothing for n>=2", self.max_n),
        }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and the hypothesis n-gram total.
fn clipped_matches<S: AsRef<str>, R: AsRef<[S]>>(hyp: &[S], refs: &[R], n: usize) -> (usize, usize) {
    let hyp_counts = ngram_counts(hyp, n);
    let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
    for r in refs {
        for (gram, c) in ngram_counts(r.as_ref(), n) {
            let slot = max_ref.entry(gram).or_insert(0);
            *slot = (*slot).max(c);
        }
    }
    let matched = hyp_counts
        .iter()
        .map(|(gram, &c)| c.min(max_ref.get(gram).copied().unwrap_or(0)))
        .sum();
    (matched, hyp.len().saturating_sub(n - 1))
}

/// Reference length closest to `c`; ties go to the shorter reference.
fn closest_ref_len<S, R: AsRef<[S]>>(refs: &[R], c: usize) -> usize {
    refs.iter()
        .map(|r| r.as_ref().len())
        .min_by_key(|&len| (len.abs_diff(c), len))
        .unwrap_or(0)
}

fn brevity_penalty<T: Scalar>(c: usize, r: usize) -> T {
    if c == 0 {
        T::zero()
    } else if c >= r {
        T::one()
    } else {
        (T::one() - T::of_usize(r) / T::of_usize(c)).exp()
    }
}

/// Sentence BLEU-4 with add-one smoothing for n >= 2.
pub fn bleu<T: Scalar, S: AsRef<str>, R: AsRef<[S]>>(hypothesis: &[S], references: &[R]) -> Result<T, MetricError> {
    bleu_with(hypothesis, references, BleuConfig::default())
}

pub fn bleu_with<T: Scalar, S: AsRef<str>, R: AsRef<[S]>>(
    hypothesis: &[S],
    references: &[R],
    config: BleuConfig,
) -> Result<T, MetricError> {
    if hypothesis.is_empty() {
        return Err(MetricError::EmptyInput("hypothesis"));
    }
    if references.is_empty() || references.iter().all(|r| r.as_ref().is_empty()) {
        return Err(MetricError::EmptyInput("references"));
    }
    let mut log_sum = T::zero();
    for n in 1..=config.max_n {
        let (matched, total) = clipped_matches(hypothesis, references, n);
        let (num, den) = match config.smoothing {
            Smoothing::AddOne if n >= 2 => (matched + 1, total + 1),
            _ => (matched, total),
        };
        if num == 0 || den == 0 {
            return Ok(T::zero());
        }
        log_sum += (T::of_usize(num) / T::of_usize(den)).ln();
    }
    let c = hypothesis.len();
    let bp: T = brevity_penalty(c, closest_ref_len(references, c));
    Ok(bp * (log_sum / T::of_usize(config.max_n)).exp())
}

/// BLEU of a system output against its own input.
pub fn self_bleu<T: Scalar, S: AsRef<str>>(input: &[S], output: &[S]) -> Result<T, MetricError> {
    bleu(output, &[input])
}

/// Unsmoothed corpus BLEU-4: n-gram statistics and lengths summed over all
/// segments before the geometric mean.
pub fn corpus_bleu<T: Scalar, S: AsRef<str>, R: AsRef<[S]>>(
    hypotheses: &[Vec<S>],
    references: &[Vec<R>],
) -> Result<T, MetricError> {
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch { left: hypotheses.len(), right: references.len() });
    }
    if hypotheses.is_empty() {
        return Err(MetricError::EmptyInput("hypotheses"));
    }
    let max_n = 4;
    let mut matched = vec![0usize; max_n];
    let mut totals = vec![0usize; max_n];
    let (mut c, mut r) = (0usize, 0usize);
    for (hyp, refs) in hypotheses.iter().zip(references) {
        for n in 1..=max_n {
            let (m, t) = clipped_matches(hyp, refs, n);
            matched[n - 1] += m;
            totals[n - 1] += t;
        }
        c += hyp.len();
        r += closest_ref_len(refs, hyp.len());
    }
    let mut log_sum = T::zero();
    for (m, t) in matched.iter().zip(&totals) {
        if *m == 0 || *t == 0 {
            return Ok(T::zero());
        }
        log_sum += (T::of_usize(*m) / T::of_usize(*t)).ln();
    }
    let bp: T = brevity_penalty(c, r);
    Ok(bp * (log_sum / T::of_usize(max_n)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_one() {
        let s = w("the cat sat on the mat");
        assert_abs_diff_eq!(bleu::<f64, _, _>(&s, &[s.clone()]).unwrap(), 1.0, epsilon = 1e-15);
        let short = w("hi");
        assert_abs_diff_eq!(bleu::<f64, _, _>(&short, &[short.clone()]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn disjoint_is_zero() {
        let v: f64 = bleu(&w("a b c d"), &[w("e f g h")]).unwrap();
        assert!(v < 0.1);
    }

    #[test]
    fn hand_computed_pair() {
        // hyp: the cat sat on the mat ; ref: the cat is on the mat
        // p1 = 5/6, p2 = (3+1)/(5+1), p3 = (1+1)/(4+1), p4 = (0+1)/(3+1), BP = 1
        let expected = (5.0f64 / 6.0 * 4.0 / 6.0 * 2.0 / 5.0 * 1.0 / 4.0).powf(0.25);
        let v: f64 = bleu(&w("the cat sat on the mat"), &[w("the cat is on the mat")]).unwrap();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
    }

    #[test]
    fn brevity_penalty_uses_closest_reference() {
        let hyp = w("a b c");
        let v: f64 = bleu(&hyp, &[w("a b c d e f"), w("a b c x")]).unwrap();
        // closest reference length 4: BP = exp(1 - 4/3)
        let p = (1.0f64 * 3.0 / 3.0 * 2.0 / 2.0 * 1.0 / 1.0).powf(0.25);
        assert_abs_diff_eq!(v, (1.0f64 - 4.0 / 3.0).exp() * p, epsilon = 1e-12);
    }

    #[test]
    fn self_bleu_is_bleu_against_input() {
        let (a, b) = (w("we use a model"), w("we train the model"));
        assert_eq!(self_bleu::<f64, _>(&a, &b).unwrap(), bleu::<f64, _, _>(&b, &[a.clone()]).unwrap());
        assert_eq!(self_bleu::<f64, _>(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn empty_inputs_error() {
        let empty: Vec<&str> = vec![];
        assert!(bleu::<f64, _, _>(&empty, &[w("a")]).is_err());
        assert!(bleu::<f64, _, Vec<&str>>(&w("a"), &[]).is_err());
    }

    #[test]
    fn corpus_bleu_identity_and_zero() {
        let hyps = vec![w("the cat sat on the mat"), w("a dog ran off fast")];
        let refs: Vec<Vec<Vec<&str>>> = hyps.iter().map(|h| vec![h.clone()]).collect();
        assert_abs_diff_eq!(corpus_bleu::<f64, _, _>(&hyps, &refs).unwrap(), 1.0, epsilon = 1e-12);
        let other = vec![vec![w("x y z w v u")], vec![w("p q r s t")]];
        assert_eq!(corpus_bleu::<f64, _, _>(&hyps, &other).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn bounded(hyp in proptest::collection::vec(0u8..6, 1..12), r in proptest::collection::vec(0u8..6, 1..12)) {
            let h: Vec<String> = hyp.iter().map(|x| x.to_string()).collect();
            let rr: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            let v: f64 = bleu(&h, &[rr]).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            let id: f64 = bleu(&h, &[h.clone()]).unwrap();
            prop_assert!((id - 1.0).abs() < 1e-12);
        }
    }
}
