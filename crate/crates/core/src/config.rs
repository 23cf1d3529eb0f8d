//! Pipeline configuration: a flat `key = value` file.
//!
//! ```text
//! # comments start with '#'
//! window_days = 7
//! tag_freq_cap = 200
//! top_k = 5
//! relation_whitelist = ["nsubj", "dobj", "prep", "pobj"]
//! allow_duplicates = true
//! beam_width = 64
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{DEFAULT_TAG_FREQ_CAP, DEFAULT_TOP_K, DEFAULT_WINDOW_DAYS};
use crate::metrics::{EvalConfig, FuzzyMatcher};
use crate::qcv::{SolveOptions, DEFAULT_MAX_EXHAUSTIVE_SLOTS};
use crate::templatize::{RelationWhitelist, TemplatizeOptions, DEFAULT_RELATIONS, MIN_CAPTION_TOKENS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("invalid {key}: {msg}")]
    Invalid { key: &'static str, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub window_days: u32,
    pub tag_freq_cap: usize,
    pub top_k: usize,
    pub relation_whitelist: Vec<String>,
    pub allow_duplicates: bool,
    /// `None` selects exhaustive search.
    pub beam_width: Option<usize>,
    pub min_caption_tokens: usize,
    pub fuzzy_threshold: f64,
    pub max_exhaustive_slots: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_days: DEFAULT_WINDOW_DAYS,
            tag_freq_cap: DEFAULT_TAG_FREQ_CAP,
            top_k: DEFAULT_TOP_K,
            relation_whitelist: DEFAULT_RELATIONS.iter().map(|s| s.to_string()).collect(),
            allow_duplicates: true,
            beam_width: None,
            min_caption_tokens: MIN_CAPTION_TOKENS,
            fuzzy_threshold: 0.5,
            max_exhaustive_slots: DEFAULT_MAX_EXHAUSTIVE_SLOTS,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            msg: e.to_string().trim_end().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &'static str, v: usize| {
            if v == 0 {
                Err(ConfigError::Invalid {
                    key,
                    msg: "must be positive".into(),
                })
            } else {
                Ok(())
            }
        };
        positive("tag_freq_cap", self.tag_freq_cap)?;
        positive("top_k", self.top_k)?;
        positive("min_caption_tokens", self.min_caption_tokens)?;
        positive("max_exhaustive_slots", self.max_exhaustive_slots)?;
        if let Some(w) = self.beam_width {
            positive("beam_width", w)?;
        }
        if !(self.fuzzy_threshold > 0.0 && self.fuzzy_threshold <= 1.0) {
            return Err(ConfigError::Invalid {
                key: "fuzzy_threshold",
                msg: format!("{} is outside (0, 1]", self.fuzzy_threshold),
            });
        }
        if self.relation_whitelist.iter().any(|r| r.trim().is_empty()) {
            return Err(ConfigError::Invalid {
                key: "relation_whitelist",
                msg: "empty label".into(),
            });
        }
        Ok(())
    }

    pub fn templatize_options(&self) -> TemplatizeOptions {
        TemplatizeOptions {
            whitelist: RelationWhitelist::new(&self.relation_whitelist),
            min_tokens: self.min_caption_tokens,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            allow_duplicates: self.allow_duplicates,
            max_exhaustive_slots: self.max_exhaustive_slots,
            beam_width: self.beam_width,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            fuzzy: FuzzyMatcher {
                jaccard_threshold: self.fuzzy_threshold,
            },
            ..EvalConfig::default()
        }
    }
}
