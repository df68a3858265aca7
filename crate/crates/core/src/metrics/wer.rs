use super::MetricError;
use crate::Scalar;

/// Minimum number of unit-cost substitutions, deletions and insertions
/// turning `a` into `b`.
pub fn edit_distance<W: PartialEq>(a: &[W], b: &[W]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Word error rate: edit distance divided by the reference length.
pub fn wer<T: Scalar, W: PartialEq>(reference: &[W], hypothesis: &[W]) -> Result<T, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyInput("reference"));
    }
    Ok(T::of_usize(edit_distance(reference, hypothesis)) / T::of_usize(reference.len()))
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
    fn cases() {
        assert_eq!(wer::<f64, _>(&w("a b c"), &w("a b c")).unwrap(), 0.0);
        assert_abs_diff_eq!(wer::<f64, _>(&w("the cat sat"), &w("the dog sat on")).unwrap(), 2.0 / 3.0);
        assert_eq!(wer::<f64, _>(&w("a b c"), &[]).unwrap(), 1.0);
        assert!(wer::<f64, &str>(&[], &w("a")).is_err());
        assert_eq!(wer::<f32, _>(&w("a b"), &w("a b c d")).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn cost_is_symmetric_and_zero_on_self(
            a in proptest::collection::vec(0u8..5, 0..10),
            b in proptest::collection::vec(0u8..5, 0..10),
        ) {
            prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
            prop_assert_eq!(edit_distance(&a, &a), 0);
            prop_assert!(edit_distance(&a, &b) <= a.len().max(b.len()));
            prop_assert!(edit_distance(&a, &b) >= a.len().abs_diff(b.len()));
        }
    }
}
