//! Service configuration: a flat `key = value` file, then `SCIPROSE_*`
//! environment variables on top.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sciprose_core::forge::ContextMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub score_model: Option<PathBuf>,
    pub section_model: Option<PathBuf>,
    pub lambda: f64,
    pub context_mode: u8,
    pub paraphraser_endpoint: Option<String>,
    pub mlm_endpoint: Option<String>,
    pub max_sentences: usize,
    pub max_body_bytes: usize,
    /// Only sentences scoring below this are sent to the paraphraser.
    pub paraphrase_threshold: f64,
    pub paraphrase_deadline_ms: u64,
    pub max_in_flight: usize,
    pub context_max_words: usize,
    /// Surname file used when `analyze` normalizes LaTeX.
    pub names_file: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".parse().expect("valid literal"),
            score_model: None,
            section_model: None,
            lambda: 0.2,
            context_mode: 1,
            paraphraser_endpoint: None,
            mlm_endpoint: None,
            max_sentences: 500,
            max_body_bytes: 1 << 20,
            paraphrase_threshold: 0.5,
            paraphrase_deadline_ms: 5000,
            max_in_flight: 8,
            context_max_words: sciprose_core::forge::DEFAULT_MAX_WORDS,
            names_file: None,
        }
    }
}

/// Config keys and the environment variable that overrides each.
pub const ENV_OVERRIDES: [(&str, &str); 14] = [
    ("listen", "SCIPROSE_LISTEN"),
    ("score_model", "SCIPROSE_SCORE_MODEL"),
    ("section_model", "SCIPROSE_SECTION_MODEL"),
    ("lambda", "SCIPROSE_LAMBDA"),
    ("context_mode", "SCIPROSE_CONTEXT_MODE"),
    ("paraphraser_endpoint", "SCIPROSE_PARAPHRASER_ENDPOINT"),
    ("mlm_endpoint", "SCIPROSE_MLM_ENDPOINT"),
    ("max_sentences", "SCIPROSE_MAX_SENTENCES"),
    ("max_body_bytes", "SCIPROSE_MAX_BODY_BYTES"),
    ("paraphrase_threshold", "SCIPROSE_PARAPHRASE_THRESHOLD"),
    ("paraphrase_deadline_ms", "SCIPROSE_PARAPHRASE_DEADLINE_MS"),
    ("max_in_flight", "SCIPROSE_MAX_IN_FLIGHT"),
    ("context_max_words", "SCIPROSE_CONTEXT_MAX_WORDS"),
    ("names_file", "SCIPROSE_NAMES_FILE"),
];

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: ServiceConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Applies overrides from `lookup` (normally `std::env::var`).
    pub fn apply_env(mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        for (key, var) in ENV_OVERRIDES {
            let Some(raw) = lookup(var) else { continue };
            let bad = |e: &dyn std::fmt::Display| anyhow::anyhow!("{var}={raw:?}: {e}");
            let opt_string = |raw: &str| (!raw.is_empty()).then(|| raw.to_string());
            match key {
                "listen" => self.listen = raw.parse().map_err(|e| bad(&e))?,
                "score_model" => self.score_model = opt_string(&raw).map(PathBuf::from),
                "section_model" => self.section_model = opt_string(&raw).map(PathBuf::from),
                "lambda" => self.lambda = raw.parse().map_err(|e| bad(&e))?,
                "context_mode" => self.context_mode = raw.parse().map_err(|e| bad(&e))?,
                "paraphraser_endpoint" => self.paraphraser_endpoint = opt_string(&raw),
                "mlm_endpoint" => self.mlm_endpoint = opt_string(&raw),
                "max_sentences" => self.max_sentences = raw.parse().map_err(|e| bad(&e))?,
                "max_body_bytes" => self.max_body_bytes = raw.parse().map_err(|e| bad(&e))?,
                "paraphrase_threshold" => self.paraphrase_threshold = raw.parse().map_err(|e| bad(&e))?,
                "paraphrase_deadline_ms" => self.paraphrase_deadline_ms = raw.parse().map_err(|e| bad(&e))?,
                "max_in_flight" => self.max_in_flight = raw.parse().map_err(|e| bad(&e))?,
                "context_max_words" => self.context_max_words = raw.parse().map_err(|e| bad(&e))?,
                "names_file" => self.names_file = opt_string(&raw).map(PathBuf::from),
                _ => unreachable!("every key is listed"),
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            bail!("lambda must lie in (0, 1), got {}", self.lambda);
        }
        ContextMode::try_from(self.context_mode).map_err(anyhow::Error::msg)?;
        if self.max_sentences == 0 || self.max_body_bytes == 0 || self.max_in_flight == 0 {
            bail!("max_sentences, max_body_bytes and max_in_flight must be positive");
        }
        if self.context_max_words == 0 {
            bail!("context_max_words must be positive");
        }
        Ok(())
    }

    pub fn default_context(&self) -> ContextMode {
        ContextMode::try_from(self.context_mode).expect("validated")
    }
}
