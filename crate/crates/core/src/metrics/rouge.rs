use super::{check_pairs, lowered, EvalPair, MetricsError};

pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS F-measure `(1 + b^2) P R / (R + b^2 P)` against the best reference.
pub fn rouge_l_pair(pair: &EvalPair, beta: f64) -> f64 {
    let cand = lowered(&pair.candidate);
    let b2 = beta * beta;
    pair.references
        .iter()
        .map(|r| {
            let r = lowered(r);
            let lcs = lcs_len(&cand, &r);
            if lcs == 0 {
                return 0.0;
            }
            let p = lcs as f64 / cand.len() as f64;
            let rec = lcs as f64 / r.len() as f64;
            (1.0 + b2) * p * rec / (rec + b2 * p)
        })
        .fold(0.0, f64::max)
}

/// Mean per-pair ROUGE-L.
pub fn rouge_l(pairs: &[EvalPair], beta: f64) -> Result<f64, MetricsError> {
    check_pairs(pairs)?;
    Ok(pairs.iter().map(|p| rouge_l_pair(p, beta)).sum::<f64>() / pairs.len() as f64)
}
