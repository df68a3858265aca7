//! Unigram-alignment METEOR with exact, stem and synonym stages.

use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MeteorParams {
    fn default() -> Self {
        Self { alpha: 0.9, beta: 3.0, gamma: 0.5 }
    }
}

/// Groups of interchangeable words. One group per line, words separated by
/// commas or whitespace; `#` starts a comment line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    groups: HashMap<String, Vec<usize>>,
}

impl SynonymTable {
    pub fn parse(text: &str) -> Self {
        let mut table = Self::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let words: Vec<&str> = line.split([',', ' ', '\t']).filter(|w| !w.is_empty()).collect();
            table.add_group(&words);
        }
        table
    }

    pub fn add_group(&mut self, words: &[&str]) {
        let id = self.groups.values().flatten().max().map_or(0, |m| m + 1);
        for w in words {
            self.groups.entry(w.to_lowercase()).or_default().push(id);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        match (self.groups.get(&a.to_lowercase()), self.groups.get(&b.to_lowercase())) {
            (Some(ga), Some(gb)) => ga.iter().any(|g| gb.contains(g)),
            _ => false,
        }
    }
}

/// Aligned (hypothesis index, reference index) pairs plus the derived counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
}

/// METEOR with the standard parameters.
pub fn meteor_lite<T: Scalar, S: AsRef<str>>(hypothesis: &[S], reference: &[S], synonyms: Option<&SynonymTable>) -> T {
    meteor_with(hypothesis, reference, synonyms, MeteorParams::default()).0
}

/// METEOR score and the alignment it was computed from.
pub fn meteor_with<T: Scalar, S: AsRef<str>>(
    hypothesis: &[S],
    reference: &[S],
    synonyms: Option<&SynonymTable>,
    params: MeteorParams,
) -> (T, Alignment) {
    let alignment = align(hypothesis, reference, synonyms);
    let m = alignment.pairs.len();
    if m == 0 {
        return (T::zero(), alignment);
    }
    let p = T::of_usize(m) / T::of_usize(hypothesis.len());
    let r = T::of_usize(m) / T::of_usize(reference.len());
    let alpha = T::of(params.alpha);
    let f_mean = p * r / (alpha * p + (T::one() - alpha) * r);
    let frag = T::of_usize(alignment.chunks) / T::of_usize(m);
    let penalty = T::of(params.gamma) * frag.powf(T::of(params.beta));
    (f_mean * (T::one() - penalty), alignment)
}

fn align<S: AsRef<str>>(hyp: &[S], reference: &[S], synonyms: Option<&SynonymTable>) -> Alignment {
    let lower = |xs: &[S]| xs.iter().map(|s| s.as_ref().to_lowercase()).collect::<Vec<_>>();
    let (h, r) = (lower(hyp), lower(reference));
    let stemmer = Stemmer::create(Algorithm::English);
    let stem = |xs: &[String]| xs.iter().map(|w| stemmer.stem(w).into_owned()).collect::<Vec<_>>();
    let (hs, rs) = (stem(&h), stem(&r));

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut h_used = vec![false; h.len()];
    let mut r_used = vec![false; r.len()];
    let stages: Vec<Box<dyn Fn(usize, usize) -> bool + '_>> = {
        let mut v: Vec<Box<dyn Fn(usize, usize) -> bool + '_>> =
            vec![Box::new(|i, j| h[i] == r[j]), Box::new(|i, j| hs[i] == rs[j])];
        if let Some(table) = synonyms {
            let (h, r) = (&h, &r);
            v.push(Box::new(move |i, j| table.are_synonyms(&h[i], &r[j])));
        }
        v
    };
    for matches in &stages {
        let stage = max_matching(&h_used, &r_used, matches.as_ref());
        let stage = uncross(stage, &pairs, matches.as_ref());
        for &(i, j) in &stage {
            h_used[i] = true;
            r_used[j] = true;
        }
        pairs.extend(stage);
    }
    pairs.sort_unstable();
    let chunks = count_chunks(&pairs);
    Alignment { pairs, chunks }
}

/// Maximum bipartite matching among unused tokens (augmenting paths).
/// Candidates are tried in order of relative-position distance so ties
/// resolve towards monotone alignments.
fn max_matching(h_used: &[bool], r_used: &[bool], matches: &dyn Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let (nh, nr) = (h_used.len(), r_used.len());
    let candidates: Vec<Vec<usize>> = (0..nh)
        .map(|i| {
            if h_used[i] {
                return Vec::new();
            }
            let mut c: Vec<usize> = (0..nr).filter(|&j| !r_used[j] && matches(i, j)).collect();
            let rel = |i: usize, j: usize| (i as f64 / nh as f64 - j as f64 / nr as f64).abs();
            c.sort_by(|&a, &b| rel(i, a).total_cmp(&rel(i, b)).then(a.cmp(&b)));
            c
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; nr];
    for i in 0..nh {
        let mut seen = vec![false; nr];
        augment(i, &candidates, &mut owner, &mut seen);
    }
    let mut pairs: Vec<(usize, usize)> = owner.iter().enumerate().filter_map(|(j, o)| o.map(|i| (i, j))).collect();
    pairs.sort_unstable();
    pairs
}

fn augment(i: usize, cand: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &j in &cand[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none() || augment(owner[j].unwrap(), cand, owner, seen) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 < b.0) != (a.1 < b.1)
}

/// Swaps the reference ends of crossing pairs while that lowers the total
/// number of crossings (against both this stage and earlier stages).
fn uncross(
    mut stage: Vec<(usize, usize)>,
    fixed: &[(usize, usize)],
    matches: &dyn Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let crossings_of = |p: (usize, usize), stage: &[(usize, usize)], skip: [usize; 2]| -> usize {
        let own = stage.iter().enumerate().filter(|(k, q)| !skip.contains(k) && crosses(p, **q)).count();
        own + fixed.iter().filter(|q| crosses(p, **q)).count()
    };
    let mut improved = true;
    while improved {
        improved = false;
        for a in 0..stage.len() {
            for b in a + 1..stage.len() {
                let (pa, pb) = (stage[a], stage[b]);
                if !crosses(pa, pb) || !matches(pa.0, pb.1) || !matches(pb.0, pa.1) {
                    continue;
                }
                let (na, nb) = ((pa.0, pb.1), (pb.0, pa.1));
                let before = crossings_of(pa, &stage, [a, b]) + crossings_of(pb, &stage, [a, b]) + 1;
                let after = crossings_of(na, &stage, [a, b])
                    + crossings_of(nb, &stage, [a, b])
                    + usize::from(crosses(na, nb));
                if after < before {
                    stage[a] = na;
                    stage[b] = nb;
                    improved = true;
                }
            }
        }
    }
    stage
}

/// Runs of pairs adjacent in both sentences, in hypothesis order.
fn count_chunks(sorted_pairs: &[(usize, usize)]) -> usize {
    if sorted_pairs.is_empty() {
        return 0;
    }
    1 + sorted_pairs
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}
