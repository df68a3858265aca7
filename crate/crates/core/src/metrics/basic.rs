use std::collections::BTreeSet;

use super::MetricError;
use crate::Scalar;

/// Mean squared error.
pub fn mse<T: Scalar>(predictions: &[T], targets: &[T]) -> Result<T, MetricError> {
    if predictions.len() != targets.len() {
        return Err(MetricError::LengthMismatch { left: predictions.len(), right: targets.len() });
    }
    if predictions.is_empty() {
        return Err(MetricError::EmptyInput("predictions"));
    }
    let sum: T = predictions.iter().zip(targets).map(|(&p, &t)| (p - t) * (p - t)).sum();
    Ok(sum / T::of_usize(predictions.len()))
}

/// Sample-averaged F1 of multi-label predictions. A sample where both sets
/// are empty scores 1.
pub fn sample_f1<T: Scalar, L: Ord>(
    predicted: &[BTreeSet<L>],
    gold: &[BTreeSet<L>],
) -> Result<T, MetricError> {
    if predicted.len() != gold.len() {
        return Err(MetricError::LengthMismatch { left: predicted.len(), right: gold.len() });
    }
    if predicted.is_empty() {
        return Err(MetricError::EmptyInput("predicted"));
    }
    let total: T = predicted
        .iter()
        .zip(gold)
        .map(|(p, g)| {
            if p.is_empty() && g.is_empty() {
                T::one()
            } else {
                let common = p.intersection(g).count();
                T::of_usize(2 * common) / T::of_usize(p.len() + g.len())
            }
        })
        .sum();
    Ok(total / T::of_usize(predicted.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn s(items: &[u8]) -> BTreeSet<u8> {
        items.iter().copied().collect()
    }

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[0.9], &[0.9]).unwrap(), 0.0);
        assert_abs_diff_eq!(mse(&[0.9, 0.1], &[0.1, 0.9]).unwrap(), 0.64, epsilon = 1e-12);
        assert_abs_diff_eq!(mse(&[1.3f32, 2.3], &[1.0, 2.0]).unwrap(), 0.09, epsilon = 1e-5);
        assert_eq!(mse::<f64>(&[1.0], &[]), Err(MetricError::LengthMismatch { left: 1, right: 0 }));
        assert!(mse::<f64>(&[], &[]).is_err());
    }

    #[test]
    fn f1_cases() {
        let f: f64 = sample_f1(&[s(&[1, 2]), s(&[3])], &[s(&[1, 2]), s(&[3])]).unwrap();
        assert_eq!(f, 1.0);
        let f: f64 = sample_f1(&[s(&[0])], &[s(&[0, 1])]).unwrap();
        assert_abs_diff_eq!(f, 2.0 / 3.0, epsilon = 1e-15);
        let f: f64 = sample_f1(&[s(&[])], &[s(&[6])]).unwrap();
        assert_eq!(f, 0.0);
        let f: f64 = sample_f1(&[s(&[])], &[s(&[])]).unwrap();
        assert_eq!(f, 1.0);
        assert!(sample_f1::<f64, u8>(&[s(&[])], &[]).is_err());
    }

    proptest! {
        #[test]
        fn f1_is_permutation_invariant(
            pairs in proptest::collection::vec((proptest::collection::btree_set(0u8..7, 0..4), proptest::collection::btree_set(0u8..7, 0..4)), 1..20),
            rot in 0usize..20,
        ) {
            let (p, g): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
            let a: f64 = sample_f1(&p, &g).unwrap();
            let mut rotated = pairs.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            let (p2, g2): (Vec<_>, Vec<_>) = rotated.into_iter().unzip();
            let b: f64 = sample_f1(&p2, &g2).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
