use std::collections::HashMap;

use super::{check_pairs, lowered, ngram_counts, EvalPair, MetricsError};

/// Corpus BLEU-1..=`max_n`.
///
/// Clipped n-gram matches and candidate n-gram totals are summed over the
/// corpus before taking ratios. BLEU-k is the geometric mean of the first k
/// precisions times the brevity penalty `exp(1 - r/c)` (applied when
/// `c < r`), where `r` sums each pair's closest reference length (shorter on
/// ties).
pub fn bleu(pairs: &[EvalPair], max_n: usize) -> Result<Vec<f64>, MetricsError> {
    check_pairs(pairs)?;
    let mut matched = vec![0usize; max_n + 1];
    let mut total = vec![0usize; max_n + 1];
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;

    for pair in pairs {
        let cand = lowered(&pair.candidate);
        let refs: Vec<Vec<String>> = pair.references.iter().map(|r| lowered(r)).collect();
        cand_len += cand.len();
        ref_len += refs
            .iter()
            .map(Vec::len)
            .min_by_key(|&len| (len.abs_diff(cand.len()), len))
            .unwrap_or(0);

        for n in 1..=max_n {
            let counts = ngram_counts(&cand, n);
            let mut max_ref: HashMap<&[String], usize> = HashMap::new();
            for r in &refs {
                for (gram, c) in ngram_counts(r, n) {
                    let e = max_ref.entry(gram).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            for (gram, c) in counts {
                matched[n] += c.min(max_ref.get(gram).copied().unwrap_or(0));
                total[n] += c;
            }
        }
    }

    let bp = if cand_len == 0 {
        0.0
    } else if cand_len < ref_len {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    } else {
        1.0
    };

    let mut scores = Vec::with_capacity(max_n);
    let mut log_sum = 0.0;
    let mut zero = false;
    for n in 1..=max_n {
        if matched[n] == 0 || total[n] == 0 {
            zero = true;
        } else {
            log_sum += (matched[n] as f64 / total[n] as f64).ln();
        }
        scores.push(if zero { 0.0 } else { bp * (log_sum / n as f64).exp() });
    }
    Ok(scores)
}
