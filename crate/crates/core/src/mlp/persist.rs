use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Head, MlpError, MlpModel, TrainConfig, Vocabulary};
use crate::Scalar;

pub const MAGIC: &[u8; 8] = b"WIDEMLP\0";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

// Layout, little-endian:
//   magic[8] version:u32 total_len:u64 head:u8 vocab:u64 hidden:u64 outputs:u64
//   lr:f64 dropout:f64 wd:f64 epochs:u64 batch:u64 seed:u64 lambda:f64 min_count:u64
//   vocab: (len:u32 bytes)*
//   W1 b1 W2 b2 as f64
//   sha256 of everything above

impl<T: Scalar> MlpModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let len_at = b.len();
        b.extend_from_slice(&0u64.to_le_bytes());
        b.push(self.head().code());
        for n in [self.vocab().len(), self.hidden_width(), self.head().outputs()] {
            b.extend_from_slice(&(n as u64).to_le_bytes());
        }
        let c = self.config();
        b.extend_from_slice(&c.learning_rate.as_f64().to_le_bytes());
        b.extend_from_slice(&c.dropout.as_f64().to_le_bytes());
        b.extend_from_slice(&c.weight_decay.as_f64().to_le_bytes());
        for n in [c.epochs as u64, c.batch_size as u64, c.seed] {
            b.extend_from_slice(&n.to_le_bytes());
        }
        b.extend_from_slice(&c.lambda_threshold.as_f64().to_le_bytes());
        b.extend_from_slice(&(c.min_count as u64).to_le_bytes());
        for token in self.vocab().tokens() {
            b.extend_from_slice(&(token.len() as u32).to_le_bytes());
            b.extend_from_slice(token.as_bytes());
        }
        for block in self.parameters() {
            for x in block {
                b.extend_from_slice(&x.as_f64().to_le_bytes());
            }
        }
        let total = (b.len() + DIGEST_LEN) as u64;
        b[len_at..len_at + 8].copy_from_slice(&total.to_le_bytes());
        let digest = Sha256::digest(&b);
        b.extend_from_slice(&digest);
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MlpError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len(), "magic")? != MAGIC {
            return Err(format_err("magic", "not a model file"));
        }
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(format_err("version", format!("found {version}, this build reads {FORMAT_VERSION}")));
        }
        let total = r.u64("total_len")?;
        if total != bytes.len() as u64 {
            return Err(format_err(
                "total_len",
                format!("header says {total} bytes but the file has {} (truncated or padded)", bytes.len()),
            ));
        }
        let body = bytes.len() - DIGEST_LEN;
        let computed = Sha256::digest(&bytes[..body]);
        if computed.as_slice() != &bytes[body..] {
            return Err(MlpError::Checksum { stored: hex(&bytes[body..]), computed: hex(&computed) });
        }
        let head = Head::from_code(r.u8("head")?).ok_or_else(|| format_err("head", "unknown head kind"))?;
        let vocab_len = r.count("vocab_size")?;
        let hidden = r.count("hidden")?;
        let outputs = r.count("outputs")?;
        if outputs != head.outputs() {
            return Err(format_err("outputs", format!("{outputs} outputs for a {} head", head.as_str())));
        }
        let config = TrainConfig {
            learning_rate: T::of(r.f64("learning_rate")?),
            dropout: T::of(r.f64("dropout")?),
            weight_decay: T::of(r.f64("weight_decay")?),
            epochs: r.count("epochs")?,
            batch_size: r.count("batch_size")?,
            seed: r.u64("seed")?,
            lambda_threshold: T::of(r.f64("lambda_threshold")?),
            hidden_width: hidden,
            min_count: 0,
        };
        let min_count = r.count("min_count")?;
        let config = TrainConfig { min_count, ..config };
        let mut tokens = Vec::with_capacity(vocab_len.min(1 << 20));
        for _ in 0..vocab_len {
            let n = r.u32("vocabulary")? as usize;
            let raw = r.take(n, "vocabulary")?;
            let token = std::str::from_utf8(raw).map_err(|_| format_err("vocabulary", "token is not UTF-8"))?;
            tokens.push(token.to_string());
        }
        let vocab = Vocabulary::from_tokens(tokens, min_count)
            .map_err(|e| format_err("vocabulary", e.to_string()))?;
        let w1 = r.floats(hidden * vocab_len, "W1")?;
        let b1 = r.floats(hidden, "b1")?;
        let w2 = r.floats(outputs * hidden, "W2")?;
        let b2 = r.floats(outputs, "b2")?;
        if r.pos != body {
            return Err(format_err("checksum", "unexpected bytes before the checksum"));
        }
        MlpModel::from_parts(vocab, head, w1, b1, w2, b2, config).map_err(|e| format_err("parameters", e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MlpError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| MlpError::Io(format!("writing {}: {e}", path.display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MlpError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| MlpError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    /// Hex SHA-256 of the serialised model, as stored in its trailer.
    pub fn checksum(&self) -> String {
        let bytes = self.to_bytes();
        hex(&bytes[bytes.len() - DIGEST_LEN..])
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn format_err(field: &'static str, message: impl Into<String>) -> MlpError {
    MlpError::Format { field, message: message.into() }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], MlpError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format_err(field, "file ends early"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self, field: &'static str) -> Result<[u8; N], MlpError> {
        Ok(self.take(N, field)?.try_into().expect("length checked"))
    }

    fn u8(&mut self, field: &'static str) -> Result<u8, MlpError> {
        Ok(self.array::<1>(field)?[0])
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, MlpError> {
        Ok(u32::from_le_bytes(self.array(field)?))
    }

    fn u64(&mut self, field: &'static str) -> Result<u64, MlpError> {
        Ok(u64::from_le_bytes(self.array(field)?))
    }

    fn count(&mut self, field: &'static str) -> Result<usize, MlpError> {
        usize::try_from(self.u64(field)?).map_err(|_| format_err(field, "value too large"))
    }

    fn f64(&mut self, field: &'static str) -> Result<f64, MlpError> {
        Ok(f64::from_le_bytes(self.array(field)?))
    }

    fn floats<T: Scalar>(&mut self, n: usize, field: &'static str) -> Result<Vec<T>, MlpError> {
        let len = n.checked_mul(8).ok_or_else(|| format_err(field, "size overflows"))?;
        let raw = self.take(len, field)?;
        Ok(raw.chunks_exact(8).map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes")))).collect())
    }
}
