use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SlotRef;
use crate::candidates::{CandidateEntity, CandidatePool, CooccurrenceStats};
use crate::typesys::SlotType;

/// Self-contained solver input, as read by `oracle-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcvInstance {
    pub slots: Vec<SlotRef>,
    pub pool: CandidatePool,
    pub stats: CooccurrenceStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomInstanceSpec {
    pub min_slots: usize,
    pub max_slots: usize,
    pub max_types: usize,
    pub max_candidates: usize,
    pub max_count: u64,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        RandomInstanceSpec {
            min_slots: 2,
            max_slots: 4,
            max_types: 3,
            max_candidates: 5,
            max_count: 12,
        }
    }
}

/// Draws slots over a few types, 1..=`max_candidates` candidates per type and
/// counts satisfying `pair <= min(unary)`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, spec: &RandomInstanceSpec) -> QcvInstance {
    let n_types = rng.gen_range(1..=spec.max_types.max(1));
    let types: Vec<SlotType> = (0..n_types).map(|t| SlotType::Fine(format!("Type{t}"))).collect();
    let n_slots = rng.gen_range(spec.min_slots..=spec.max_slots);
    let slots: Vec<SlotRef> = (0..n_slots)
        .map(|i| SlotRef::new(2 * i, types[rng.gen_range(0..n_types)].clone()))
        .collect();

    let mut stats = CooccurrenceStats::new();
    let mut pool = CandidatePool::default();
    let mut names = Vec::new();
    for t in &types {
        let n = rng.gen_range(1..=spec.max_candidates.max(1));
        let mut list = Vec::with_capacity(n);
        for c in 0..n {
            let name = format!("{t}-c{c}");
            let freq = rng.gen_range(1..=spec.max_count.max(1));
            stats.set_unary(&name, freq);
            names.push((name.clone(), freq));
            list.push(CandidateEntity {
                name,
                slot_type: t.clone(),
                freq,
            });
        }
        pool.per_type.insert(t.clone(), list);
    }
    pool.rank(spec.max_candidates);
    for (i, (a, fa)) in names.iter().enumerate() {
        for (b, fb) in &names[i + 1..] {
            let count = rng.gen_range(0..=(*fa).min(*fb));
            stats.set_pair(a, b, count);
        }
    }
    QcvInstance { slots, pool, stats }
}
