use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::text::word_count;

pub const MIN_WORDS: usize = 4;
pub const MAX_WORDS: usize = 100;

/// Why a candidate sentence was dropped; variants are in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NonAscii,
    TooShort,
    TooLong,
    BadFirst,
    BadLast,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NonAscii => "NonAscii",
            RejectReason::TooShort => "TooShort",
            RejectReason::TooLong => "TooLong",
            RejectReason::BadFirst => "BadFirst",
            RejectReason::BadLast => "BadLast",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterVerdict {
    Accept,
    Reject(RejectReason),
}

impl FilterVerdict {
    pub fn is_accept(self) -> bool {
        self == FilterVerdict::Accept
    }
}

/// Applies the five checks in order and reports the first one that fails.
pub fn filter_sentence(sentence: &str) -> FilterVerdict {
    use RejectReason::*;
    if !sentence.is_ascii() {
        return FilterVerdict::Reject(NonAscii);
    }
    let words = word_count(sentence);
    if words < MIN_WORDS {
        return FilterVerdict::Reject(TooShort);
    }
    if words > MAX_WORDS {
        return FilterVerdict::Reject(TooLong);
    }
    if !sentence.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
        return FilterVerdict::Reject(BadFirst);
    }
    if !sentence.ends_with(['.', '?', '!']) {
        return FilterVerdict::Reject(BadLast);
    }
    FilterVerdict::Accept
}

/// Per-reason rejection counts plus the number of accepted sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub non_ascii: u64,
    pub too_short: u64,
    pub too_long: u64,
    pub bad_first: u64,
    pub bad_last: u64,
    pub accepted: u64,
}

impl FilterReport {
    pub fn record(&mut self, verdict: FilterVerdict) {
        use RejectReason::*;
        let slot = match verdict {
            FilterVerdict::Accept => &mut self.accepted,
            FilterVerdict::Reject(NonAscii) => &mut self.non_ascii,
            FilterVerdict::Reject(TooShort) => &mut self.too_short,
            FilterVerdict::Reject(TooLong) => &mut self.too_long,
            FilterVerdict::Reject(BadFirst) => &mut self.bad_first,
            FilterVerdict::Reject(BadLast) => &mut self.bad_last,
        };
        *slot += 1;
    }

    pub fn rejected(&self) -> u64 {
        self.non_ascii + self.too_short + self.too_long + self.bad_first + self.bad_last
    }

    pub fn examined(&self) -> u64 {
        self.rejected() + self.accepted
    }
}

impl AddAssign for FilterReport {
    fn add_assign(&mut self, o: Self) {
        self.non_ascii += o.non_ascii;
        self.too_short += o.too_short;
        self.too_long += o.too_long;
        self.bad_first += o.bad_first;
        self.bad_last += o.bad_last;
        self.accepted += o.accepted;
    }
}
