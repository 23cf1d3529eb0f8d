//! Reference solver: materializes every combination and scores each one
//! from the raw counts. Shares no scoring code with the other solvers.

use std::collections::BTreeMap;

use super::{Assignment, QcvError, SlotRef, TIE_TOLERANCE};
use crate::candidates::{CandidateEntity, CandidatePool, CooccurrenceStats};

pub fn solve_bruteforce(
    slots: &[SlotRef],
    pool: &CandidatePool,
    stats: &CooccurrenceStats,
    allow_duplicates: bool,
) -> Result<Assignment, QcvError> {
    for (i, s) in slots.iter().enumerate() {
        if slots[..i].iter().any(|o| o.position == s.position) {
            return Err(QcvError::DuplicateSlot(s.position));
        }
    }
    let unfillable: Vec<SlotRef> = slots
        .iter()
        .filter(|s| pool.candidates(&s.slot_type).is_empty())
        .cloned()
        .collect();
    let mut filled: Vec<&SlotRef> = slots
        .iter()
        .filter(|s| !pool.candidates(&s.slot_type).is_empty())
        .collect();
    filled.sort_by_key(|s| s.position);

    for s in &filled {
        for c in pool.candidates(&s.slot_type) {
            if stats.unary(&c.name).is_none() {
                return Err(QcvError::MissingCandidate(c.name.clone()));
            }
        }
    }

    // Every combination as a list of candidates in slot-position order.
    let mut combos: Vec<Vec<&CandidateEntity>> = vec![Vec::new()];
    for s in &filled {
        let mut next = Vec::new();
        for partial in &combos {
            for c in pool.candidates(&s.slot_type) {
                let mut extended = partial.clone();
                extended.push(c);
                next.push(extended);
            }
        }
        combos = next;
    }
    if !allow_duplicates {
        combos.retain(|combo| {
            (0..combo.len()).all(|i| (i + 1..combo.len()).all(|j| combo[i].name != combo[j].name))
        });
    }
    if combos.is_empty() {
        return Err(QcvError::NoFeasibleAssignment);
    }

    let mut scored = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut omega = 0.0;
        for i in 0..combo.len() {
            for j in i + 1..combo.len() {
                let (h, t) = (&combo[i].name, &combo[j].name);
                let f_h = stats.unary(h).unwrap_or(0);
                let f_t = stats.unary(t).unwrap_or(0);
                let f_ht = if h == t { f_h } else { stats.pair(h, t) };
                if f_h == 0 || f_t == 0 || f_ht > f_h.min(f_t) {
                    return Err(QcvError::Domain { f_ht, f_h, f_t });
                }
                omega += f_ht as f64 / f_h.max(f_t) as f64;
            }
        }
        let unary_total: u64 = combo.iter().map(|c| stats.unary(&c.name).unwrap_or(0)).sum();
        scored.push((omega, unary_total, combo));
    }

    let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let mut top: Vec<_> = scored.into_iter().filter(|s| best - s.0 <= TIE_TOLERANCE).collect();
    let ties = top.len();
    top.sort_by(|x, y| {
        y.1.cmp(&x.1).then_with(|| {
            let xn: Vec<&str> = x.2.iter().map(|c| c.name.as_str()).collect();
            let yn: Vec<&str> = y.2.iter().map(|c| c.name.as_str()).collect();
            xn.cmp(&yn)
        })
    });
    let (score, _, combo) = top.into_iter().next().expect("at least one combination");
    let chosen: BTreeMap<usize, CandidateEntity> = filled
        .iter()
        .zip(combo)
        .map(|(s, c)| (s.position, c.clone()))
        .collect();
    Ok(Assignment {
        chosen,
        unfillable,
        score,
        ties,
    })
}
