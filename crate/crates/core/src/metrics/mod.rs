//! Caption evaluation: corpus BLEU-1..4, ROUGE-L, CIDEr and fuzzy entity F1.
//!
//! All token comparisons are case-insensitive. METEOR is not computed; the
//! report carries an explicit `null` for it so the output keeps the usual
//! column layout.

mod bleu;
mod cider;
mod entity;
mod rouge;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::bleu;
pub use cider::{cider, cider_per_pair, CIDER_SCALE};
pub use entity::{entity_f1, entity_matches, normalize_entity, EntityScores, FuzzyMatcher};
pub use rouge::{lcs_len, rouge_l, rouge_l_pair};

pub const DEFAULT_ROUGE_BETA: f64 = 1.2;
pub const DEFAULT_CIDER_SIGMA: f64 = 6.0;
pub const DEFAULT_MAX_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no pairs to evaluate")]
    NoPairs,
    #[error("pair {0} has no references")]
    NoReferences(String),
    #[error("CIDEr needs at least 2 pairs to estimate document frequencies, got {0}")]
    DegenerateIdf(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub doc_id: String,
    pub candidate: Vec<String>,
    pub references: Vec<Vec<String>>,
    #[serde(default)]
    pub cand_entities: Vec<String>,
    #[serde(default)]
    pub ref_entities: Vec<String>,
}

impl EvalPair {
    /// Builds a pair from untokenized strings with [`tokenize`].
    pub fn from_text<S: AsRef<str>>(doc_id: impl Into<String>, candidate: &str, references: &[S]) -> Self {
        EvalPair {
            doc_id: doc_id.into(),
            candidate: tokenize(candidate),
            references: references.iter().map(|r| tokenize(r.as_ref())).collect(),
            cand_entities: Vec::new(),
            ref_entities: Vec::new(),
        }
    }

    pub fn with_entities(mut self, cand: Vec<String>, refs: Vec<String>) -> Self {
        self.cand_entities = cand;
        self.ref_entities = refs;
        self
    }
}

const LEADING: &[char] = &['"', '\'', '`', '“', '‘', '(', '['];
const TRAILING: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '”', '’', ')', ']'];

/// Lowercases and splits punctuation off word edges.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        let mut word = lower.as_str();
        while let Some(c) = word.chars().next().filter(|c| LEADING.contains(c)) {
            out.push(c.to_string());
            word = &word[c.len_utf8()..];
        }
        let mut tail = Vec::new();
        while let Some(c) = word.chars().last().filter(|c| TRAILING.contains(c)) {
            tail.push(c.to_string());
            word = &word[..word.len() - c.len_utf8()];
        }
        if !word.is_empty() {
            out.push(word.to_string());
        }
        out.extend(tail.into_iter().rev());
    }
    out
}

pub(crate) fn lowered(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| t.to_lowercase()).collect()
}

pub(crate) fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

pub(crate) fn check_pairs(pairs: &[EvalPair]) -> Result<(), MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    if let Some(p) = pairs.iter().find(|p| p.references.is_empty()) {
        return Err(MetricsError::NoReferences(p.doc_id.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub max_n: usize,
    pub rouge_beta: f64,
    pub cider_sigma: f64,
    pub fuzzy: FuzzyMatcher,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            max_n: DEFAULT_MAX_N,
            rouge_beta: DEFAULT_ROUGE_BETA,
            cider_sigma: DEFAULT_CIDER_SIGMA,
            fuzzy: FuzzyMatcher::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub bleu: String,
    pub rouge: String,
    pub rouge_beta: f64,
    pub cider: String,
    pub cider_sigma: f64,
    pub cider_scale: f64,
    pub entity_match: String,
    pub jaccard_threshold: f64,
    pub meteor: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    /// BLEU-1 through BLEU-4.
    pub bleu: Vec<f64>,
    pub meteor: Option<f64>,
    pub rouge_l: f64,
    /// `None` when the corpus is too small for document frequencies.
    pub cider: Option<f64>,
    pub entity_f1: EntityScores,
    pub metadata: ReportMetadata,
}

pub fn evaluate(pairs: &[EvalPair], cfg: &EvalConfig) -> Result<EvalReport, MetricsError> {
    check_pairs(pairs)?;
    let mut notes = Vec::new();
    let cider_score = match cider(pairs, cfg.max_n, cfg.cider_sigma) {
        Ok(s) => Some(s),
        Err(e @ MetricsError::DegenerateIdf(_)) => {
            notes.push(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        n: pairs.len(),
        bleu: bleu(pairs, cfg.max_n)?,
        meteor: None,
        rouge_l: rouge_l(pairs, cfg.rouge_beta)?,
        cider: cider_score,
        entity_f1: entity_f1(pairs, &cfg.fuzzy),
        metadata: ReportMetadata {
            bleu: "corpus-level, clipped n-gram precision, closest-reference brevity penalty".into(),
            rouge: "ROUGE-L (LCS F-measure, best reference, mean over pairs)".into(),
            rouge_beta: cfg.rouge_beta,
            cider: "CIDEr (tf-idf n-gram cosine, orders 1-4, gaussian length penalty)".into(),
            cider_sigma: cfg.cider_sigma,
            cider_scale: CIDER_SCALE,
            entity_match: "normalized containment or token Jaccard, greedy one-to-one, micro-averaged".into(),
            jaccard_threshold: cfg.fuzzy.jaccard_threshold,
            meteor: "not computed".into(),
            notes,
        },
    })
}
