use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ForgeError;
use crate::corpus::SentenceRecord;

/// Train/validate/test fractions and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub validate: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train: 0.7, validate: 0.2, test: 0.1, seed: 0 }
    }
}

impl SplitSpec {
    pub fn new(train: f64, validate: f64, test: f64, seed: u64) -> Result<Self, ForgeError> {
        let spec = Self { train, validate, test, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ForgeError> {
        let ok = [self.train, self.validate, self.test].iter().all(|r| r.is_finite() && *r > 0.0)
            && (self.train + self.validate + self.test - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(ForgeError::BadRatios { train: self.train, validate: self.validate, test: self.test })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub validate: Vec<T>,
    pub test: Vec<T>,
}

impl<T> Splits<T> {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validate.len(), self.test.len())
    }
}

/// Partitions items by group: every group lands in exactly one split, and
/// the number of groups per split follows the ratios (rounded). Items keep
/// their input order inside each split.
pub fn make_splits<T: Clone>(
    items: &[T],
    spec: &SplitSpec,
    group_of: impl Fn(&T) -> &str,
) -> Result<Splits<T>, ForgeError> {
    spec.validate()?;
    if items.len() < 3 {
        return Err(ForgeError::TooFewRecords(items.len()));
    }
    let groups: BTreeSet<&str> = items.iter().map(&group_of).collect();
    let mut groups: Vec<&str> = groups.into_iter().collect();
    groups.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let n = groups.len();
    let n_train = ((spec.train * n as f64).round() as usize).min(n);
    let n_validate = ((spec.validate * n as f64).round() as usize).min(n - n_train);
    let assignment: HashMap<&str, u8> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let slot = if i < n_train {
                0
            } else if i < n_train + n_validate {
                1
            } else {
                2
            };
            (*g, slot)
        })
        .collect();
    let mut out = Splits { train: Vec::new(), validate: Vec::new(), test: Vec::new() };
    for item in items {
        match assignment[group_of(item)] {
            0 => out.train.push(item.clone()),
            1 => out.validate.push(item.clone()),
            _ => out.test.push(item.clone()),
        }
    }
    Ok(out)
}

/// Paper-level split of sentence records.
pub fn split_records(
    records: &[SentenceRecord],
    spec: &SplitSpec,
) -> Result<Splits<SentenceRecord>, ForgeError> {
    make_splits(records, spec, |r| r.paper_id.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn items(papers: usize, per: usize) -> Vec<(String, usize)> {
        (0..papers).flat_map(|p| (0..per).map(move |s| (format!("paper{p}"), s))).collect()
    }

    #[test]
    fn ten_papers_split_seven_two_one() {
        let data = items(10, 3);
        let s = make_splits(&data, &SplitSpec::with_seed(5), |x| &x.0).unwrap();
        assert_eq!(s.sizes(), (21, 6, 3));
    }

    #[test]
    fn deterministic_per_seed() {
        let data = items(20, 2);
        let a = make_splits(&data, &SplitSpec::with_seed(9), |x| &x.0).unwrap();
        let b = make_splits(&data, &SplitSpec::with_seed(9), |x| &x.0).unwrap();
        assert_eq!(a, b);
        let c = make_splits(&data, &SplitSpec::with_seed(10), |x| &x.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn no_paper_in_two_splits() {
        let data = items(100, 10);
        let s = make_splits(&data, &SplitSpec::with_seed(1), |x| &x.0).unwrap();
        let ids = |v: &Vec<(String, usize)>| v.iter().map(|x| x.0.clone()).collect::<BTreeSet<_>>();
        let (a, b, c) = (ids(&s.train), ids(&s.validate), ids(&s.test));
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
        assert_eq!(a.len() + b.len() + c.len(), 100);
        assert_eq!(s.train.len() + s.validate.len() + s.test.len(), 1000);
    }

    #[test]
    fn errors() {
        let data = items(1, 2);
        assert_eq!(
            make_splits(&data, &SplitSpec::default(), |x| &x.0),
            Err(ForgeError::TooFewRecords(2))
        );
        assert!(SplitSpec::new(0.5, 0.5, 0.1, 0).is_err());
        assert!(SplitSpec::new(1.0, 0.0, 0.0, 0).is_err());
        assert!(SplitSpec::new(0.6, 0.3, 0.1, 0).is_ok());
    }

    proptest! {
        #[test]
        fn partition_sizes_follow_ratios(papers in 3usize..60, per in 1usize..5, seed: u64) {
            let data = items(papers, per);
            let spec = SplitSpec::with_seed(seed);
            let s = make_splits(&data, &spec, |x| &x.0).unwrap();
            prop_assert_eq!(s.train.len() + s.validate.len() + s.test.len(), data.len());
            let train_papers = s.train.len() / per;
            let val_papers = s.validate.len() / per;
            let test_papers = s.test.len() / per;
            prop_assert!((train_papers as f64 - 0.7 * papers as f64).abs() <= 1.0);
            prop_assert!((val_papers as f64 - 0.2 * papers as f64).abs() <= 1.0);
            prop_assert!((test_papers as f64 - 0.1 * papers as f64).abs() <= 1.0 + 1e-9);
        }
    }
}
