use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EvalPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMatcher {
    pub jaccard_threshold: f64,
}

impl Default for FuzzyMatcher {
    fn default() -> Self {
        FuzzyMatcher { jaccard_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Lowercases and maps non-alphanumerics to single spaces.
pub fn normalize_entity(name: &str) -> String {
    let cleaned: String = name
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn jaccard(a: &str, b: &str) -> f64 {
    let x: BTreeSet<&str> = a.split_whitespace().collect();
    let y: BTreeSet<&str> = b.split_whitespace().collect();
    let union = x.union(&y).count();
    if union == 0 {
        return 0.0;
    }
    x.intersection(&y).count() as f64 / union as f64
}

impl FuzzyMatcher {
    /// Jaccard score of two normalized names, or `None` when they do not match.
    fn score(&self, a: &str, b: &str) -> Option<f64> {
        if a.is_empty() || b.is_empty() {
            return None;
        }
        let j = jaccard(a, b);
        if a.contains(b) || b.contains(a) || j >= self.jaccard_threshold {
            Some(j)
        } else {
            None
        }
    }

    pub fn matches(&self, a: &str, b: &str) -> bool {
        self.score(&normalize_entity(a), &normalize_entity(b)).is_some()
    }
}

/// Greedy one-to-one matching, strongest pairs first, index order on ties.
/// Returns `(candidate index, reference index)` pairs.
pub fn entity_matches(cand: &[String], refs: &[String], m: &FuzzyMatcher) -> Vec<(usize, usize)> {
    let cn: Vec<String> = cand.iter().map(|s| normalize_entity(s)).collect();
    let rn: Vec<String> = refs.iter().map(|s| normalize_entity(s)).collect();
    let mut edges = Vec::new();
    for (i, a) in cn.iter().enumerate() {
        for (j, b) in rn.iter().enumerate() {
            if let Some(s) = m.score(a, b) {
                edges.push((s, i, j));
            }
        }
    }
    edges.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_c = vec![false; cn.len()];
    let mut used_r = vec![false; rn.len()];
    let mut out = Vec::new();
    for (_, i, j) in edges {
        if !used_c[i] && !used_r[j] {
            used_c[i] = true;
            used_r[j] = true;
            out.push((i, j));
        }
    }
    out.sort_unstable();
    out
}

/// Micro-averaged precision, recall and F1 over all pairs.
pub fn entity_f1(pairs: &[EvalPair], m: &FuzzyMatcher) -> EntityScores {
    let mut matched = 0usize;
    let mut n_cand = 0usize;
    let mut n_ref = 0usize;
    for p in pairs {
        let cand: Vec<String> = p.cand_entities.iter().filter(|s| !normalize_entity(s).is_empty()).cloned().collect();
        let refs: Vec<String> = p.ref_entities.iter().filter(|s| !normalize_entity(s).is_empty()).cloned().collect();
        matched += entity_matches(&cand, &refs, m).len();
        n_cand += cand.len();
        n_ref += refs.len();
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(matched, n_cand);
    let recall = ratio(matched, n_ref);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EntityScores { precision, recall, f1 }
}
