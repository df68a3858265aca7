use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::metrics::wer;
use crate::text::tokenize;

/// Change-amount group of a parallel pair: 0..=50 in steps of 10, or above 55%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bucket {
    Percent(u8),
    Overflow,
}

impl Bucket {
    pub const ALL: [Bucket; 7] = [
        Bucket::Percent(0),
        Bucket::Percent(10),
        Bucket::Percent(20),
        Bucket::Percent(30),
        Bucket::Percent(40),
        Bucket::Percent(50),
        Bucket::Overflow,
    ];

    fn from_rate(rate: f64) -> Bucket {
        let step = (rate * 10.0).round().clamp(0.0, 5.0) as u8;
        Bucket::Percent(step * 10)
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bucket::Percent(p) => write!(f, "{p}"),
            Bucket::Overflow => f.write_str("overflow"),
        }
    }
}

impl Serialize for Bucket {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bucket::Percent(p) => s.serialize_u8(*p),
            Bucket::Overflow => s.serialize_str("overflow"),
        }
    }
}

impl<'de> Deserialize<'de> for Bucket {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) if n <= 50 && n % 10 == 0 => Ok(Bucket::Percent(n as u8)),
            Raw::Text(t) if t == "overflow" => Ok(Bucket::Overflow),
            Raw::Text(t) => match t.parse::<u64>() {
                Ok(n) if n <= 50 && n % 10 == 0 => Ok(Bucket::Percent(n as u8)),
                _ => Err(serde::de::Error::custom(format!("invalid bucket `{t}`"))),
            },
            Raw::Num(n) => Err(serde::de::Error::custom(format!("invalid bucket {n}"))),
        }
    }
}

/// A corrupted sentence and the original it should be restored to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub corrupted: String,
    pub original: String,
    pub change_rate: f64,
    pub bucket: Bucket,
}

/// Buckets a pair by a known change rate, or by the WER of the corrupted
/// sentence against the original. WER above 0.55 is `Overflow`.
pub fn bucketize(original: &str, corrupted: &str, known_rate: Option<f64>) -> Bucket {
    if let Some(rate) = known_rate {
        return Bucket::from_rate(rate);
    }
    let reference = tokenize(original);
    let hypothesis = tokenize(corrupted);
    let w: f64 = match wer(&reference, &hypothesis) {
        Ok(w) => w,
        Err(_) if hypothesis.is_empty() => 0.0,
        Err(_) => f64::INFINITY,
    };
    if w <= 0.55 {
        Bucket::from_rate(w)
    } else {
        Bucket::Overflow
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_rate_rounds_to_tens() {
        assert_eq!(bucketize("a", "b", Some(0.3)), Bucket::Percent(30));
        assert_eq!(bucketize("a", "b", Some(0.0)), Bucket::Percent(0));
        assert_eq!(bucketize("a", "b", Some(0.5)), Bucket::Percent(50));
        assert_eq!(bucketize("a", "b", Some(0.45)), Bucket::Percent(50));
    }

    #[test]
    fn identical_pair_is_bucket_zero() {
        assert_eq!(bucketize("the cat sat", "the cat sat", None), Bucket::Percent(0));
    }

    #[test]
    fn high_wer_overflows() {
        assert_eq!(bucketize("the cat sat", "the dog sat on", None), Bucket::Overflow);
        // one substitution in three words: 0.33 -> 30
        assert_eq!(bucketize("the cat sat", "the dog sat", None), Bucket::Percent(30));
        // 0.55 boundary stays in range: 11 edits over 20 words
        let orig: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
        let mut hyp = orig.clone();
        for w in hyp.iter_mut().take(11) {
            *w = "x".into();
        }
        assert_eq!(bucketize(&orig.join(" "), &hyp.join(" "), None), Bucket::Percent(50));
        hyp[11] = "x".into();
        assert_eq!(bucketize(&orig.join(" "), &hyp.join(" "), None), Bucket::Overflow);
    }

    #[test]
    fn empty_original_is_total() {
        assert_eq!(bucketize("", "", None), Bucket::Percent(0));
        assert_eq!(bucketize("", "x", None), Bucket::Overflow);
    }

    #[test]
    fn serde_forms() {
        assert_eq!(serde_json::to_string(&Bucket::Percent(20)).unwrap(), "20");
        assert_eq!(serde_json::to_string(&Bucket::Overflow).unwrap(), "\"overflow\"");
        assert_eq!(serde_json::from_str::<Bucket>("40").unwrap(), Bucket::Percent(40));
        assert_eq!(serde_json::from_str::<Bucket>("\"overflow\"").unwrap(), Bucket::Overflow);
        assert!(serde_json::from_str::<Bucket>("35").is_err());
    }
}
