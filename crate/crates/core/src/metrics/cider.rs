use std::collections::{HashMap, HashSet};

use super::{check_pairs, lowered, ngram_counts, EvalPair, MetricsError};

pub const CIDER_SCALE: f64 = 10.0;

type Vector<'a> = HashMap<&'a [String], f64>;

fn tfidf<'a>(tokens: &'a [String], n: usize, df: &HashMap<Vec<String>, usize>, log_n: f64) -> (Vector<'a>, f64) {
    let mut v = Vector::new();
    for (gram, c) in ngram_counts(tokens, n) {
        let d = df.get(gram).copied().unwrap_or(0).max(1) as f64;
        v.insert(gram, c as f64 * (log_n - d.ln()));
    }
    let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
    (v, norm)
}

/// Per-pair CIDEr scores.
///
/// Document frequencies count, for each n-gram, the pairs whose reference set
/// contains it; `idf = ln N - ln max(1, df)`. Each order contributes the mean
/// over references of the tf-idf cosine times `exp(-d^2 / (2 sigma^2))`,
/// with `d` the length difference. Orders are averaged and scaled by 10.
pub fn cider_per_pair(pairs: &[EvalPair], max_n: usize, sigma: f64) -> Result<Vec<f64>, MetricsError> {
    check_pairs(pairs)?;
    if pairs.len() < 2 {
        return Err(MetricsError::DegenerateIdf(pairs.len()));
    }
    let cands: Vec<Vec<String>> = pairs.iter().map(|p| lowered(&p.candidate)).collect();
    let refs: Vec<Vec<Vec<String>>> =
        pairs.iter().map(|p| p.references.iter().map(|r| lowered(r)).collect()).collect();

    let mut df: HashMap<Vec<String>, usize> = HashMap::new();
    for rs in &refs {
        let mut seen: HashSet<&[String]> = HashSet::new();
        for r in rs {
            for n in 1..=max_n {
                seen.extend(ngram_counts(r, n).into_keys());
            }
        }
        for gram in seen {
            *df.entry(gram.to_vec()).or_insert(0) += 1;
        }
    }
    let log_n = (pairs.len() as f64).ln();

    let scores = cands
        .iter()
        .zip(&refs)
        .map(|(cand, rs)| {
            let mut total = 0.0;
            for n in 1..=max_n {
                let (cv, cnorm) = tfidf(cand, n, &df, log_n);
                let mut per_ref = 0.0;
                for r in rs {
                    let (rv, rnorm) = tfidf(r, n, &df, log_n);
                    let mut sim = 0.0;
                    if cnorm > 0.0 && rnorm > 0.0 {
                        let dot: f64 = cv.iter().filter_map(|(g, x)| rv.get(g).map(|y| x * y)).sum();
                        sim = dot / (cnorm * rnorm);
                    }
                    let delta = cand.len() as f64 - r.len() as f64;
                    per_ref += sim * (-(delta * delta) / (2.0 * sigma * sigma)).exp();
                }
                total += per_ref / rs.len() as f64;
            }
            total / max_n as f64 * CIDER_SCALE
        })
        .collect();
    Ok(scores)
}

/// Corpus CIDEr: mean of [`cider_per_pair`].
pub fn cider(pairs: &[EvalPair], max_n: usize, sigma: f64) -> Result<f64, MetricsError> {
    let s = cider_per_pair(pairs, max_n, sigma)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}
