//! Quantified collective validation.
//!
//! Every combination of candidates (one per slot) forms a complete graph
//! over the slots. An edge between candidates `h` and `t` weighs
//!
//! ```text
//! H = f(h, t) / max(f(h), f(t))
//! ```
//!
//! where `f(h, t)` counts context posts mentioning both names and `f(x)`
//! counts posts mentioning `x`. The combination with the largest summed edge
//! weight wins.
//!
//! Co-optimal combinations (within [`TIE_TOLERANCE`]) are ranked by the
//! highest summed unary frequency, then by candidate names compared slot by
//! slot in position order. [`solve`] enumerates exhaustively, [`solve_beam`]
//! trades optimality for bounded work, and [`solve_bruteforce`] is a naive
//! reference used to cross-check both.

mod beam;
mod exhaustive;
mod instance;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{CandidateEntity, CandidatePool, CooccurrenceStats};
use crate::templatize::{Template, TemplateItem};
use crate::typesys::SlotType;

pub use beam::solve_beam;
pub use exhaustive::solve_exhaustive;
pub use instance::{random_instance, QcvInstance, RandomInstanceSpec};
pub use oracle::solve_bruteforce;

/// Absolute tolerance under which two graph weights count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_MAX_EXHAUSTIVE_SLOTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcvError {
    #[error("invalid counts: co-occurrence {f_ht} with unary counts {f_h} and {f_t}")]
    Domain { f_ht: u64, f_h: u64, f_t: u64 },
    #[error("candidate {0:?} has no unary count in the co-occurrence statistics")]
    MissingCandidate(String),
    #[error(
        "{slots} fillable slots exceed the exhaustive limit of {limit}; set beam_width to search approximately"
    )]
    Capacity { slots: usize, limit: usize },
    #[error("beam width must be at least 1")]
    InvalidBeamWidth,
    #[error("slot position {0} appears more than once")]
    DuplicateSlot(usize),
    #[error("no combination assigns distinct candidates to every slot")]
    NoFeasibleAssignment,
}

/// A slot of a template, addressed by its item position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotRef {
    pub position: usize,
    pub slot_type: SlotType,
}

impl SlotRef {
    pub fn new(position: usize, slot_type: SlotType) -> Self {
        SlotRef { position, slot_type }
    }

    pub fn from_template(template: &Template) -> Vec<SlotRef> {
        template
            .items
            .iter()
            .enumerate()
            .filter_map(|(position, item)| match item {
                TemplateItem::Slot(t) => Some(SlotRef::new(position, t.clone())),
                TemplateItem::Word(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub head: usize,
    pub tail: usize,
    pub weight: f64,
}

/// A fully scored candidate combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationGraph {
    /// Slot position → candidate.
    pub assignment: BTreeMap<usize, CandidateEntity>,
    /// One edge per unordered pair of slots, `head < tail`.
    pub edges: Vec<GraphEdge>,
    pub total: f64,
}

/// Result of a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Slot position → chosen candidate.
    pub chosen: BTreeMap<usize, CandidateEntity>,
    /// Slots whose type has no candidates.
    pub unfillable: Vec<SlotRef>,
    pub score: f64,
    /// Number of combinations whose weight ties with the winner.
    pub ties: usize,
}

impl Assignment {
    pub fn empty(unfillable: Vec<SlotRef>) -> Self {
        Assignment {
            chosen: BTreeMap::new(),
            unfillable,
            score: 0.0,
            ties: 1,
        }
    }

    /// Same chosen candidates, unfillable slots and tie count, with scores
    /// equal within [`TIE_TOLERANCE`].
    pub fn equivalent(&self, other: &Assignment) -> bool {
        self.chosen == other.chosen
            && self.unfillable == other.unfillable
            && self.ties == other.ties
            && (self.score - other.score).abs() <= TIE_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub allow_duplicates: bool,
    pub max_exhaustive_slots: usize,
    /// When set, [`solve`] runs the beam search with this width.
    pub beam_width: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            allow_duplicates: true,
            max_exhaustive_slots: DEFAULT_MAX_EXHAUSTIVE_SLOTS,
            beam_width: None,
        }
    }
}

/// Edge weight between two candidates.
pub fn edge_weight(f_ht: u64, f_h: u64, f_t: u64) -> Result<f64, QcvError> {
    if f_h == 0 || f_t == 0 || f_ht > f_h.min(f_t) {
        return Err(QcvError::Domain { f_ht, f_h, f_t });
    }
    Ok(f_ht as f64 / f_h.max(f_t) as f64)
}

fn unary_of(stats: &CooccurrenceStats, name: &str) -> Result<u64, QcvError> {
    stats.unary(name).ok_or_else(|| QcvError::MissingCandidate(name.to_string()))
}

pub(crate) fn pair_weight(stats: &CooccurrenceStats, a: &str, b: &str) -> Result<f64, QcvError> {
    edge_weight(stats.pair(a, b), unary_of(stats, a)?, unary_of(stats, b)?)
}

/// Builds the complete graph over the assigned slots and sums its edges.
pub fn score_graph(
    assignment: &BTreeMap<usize, CandidateEntity>,
    stats: &CooccurrenceStats,
) -> Result<CombinationGraph, QcvError> {
    let nodes: Vec<(&usize, &CandidateEntity)> = assignment.iter().collect();
    for (_, c) in &nodes {
        unary_of(stats, &c.name)?;
    }
    let mut edges = Vec::with_capacity(nodes.len() * nodes.len().saturating_sub(1) / 2);
    for (i, (&head, h)) in nodes.iter().enumerate() {
        for (&tail, t) in &nodes[i + 1..] {
            edges.push(GraphEdge {
                head,
                tail,
                weight: pair_weight(stats, &h.name, &t.name)?,
            });
        }
    }
    let total = edges.iter().map(|e| e.weight).sum();
    Ok(CombinationGraph {
        assignment: assignment.clone(),
        edges,
        total,
    })
}

/// Picks the best combination under `opts`.
pub fn solve(
    slots: &[SlotRef],
    pool: &CandidatePool,
    stats: &CooccurrenceStats,
    opts: &SolveOptions,
) -> Result<Assignment, QcvError> {
    if let Some(width) = opts.beam_width {
        return solve_beam(slots, pool, stats, width, opts.allow_duplicates);
    }
    let fillable = slots.iter().filter(|s| !pool.candidates(&s.slot_type).is_empty()).count();
    if fillable > opts.max_exhaustive_slots {
        return Err(QcvError::Capacity {
            slots: fillable,
            limit: opts.max_exhaustive_slots,
        });
    }
    solve_exhaustive(slots, pool, stats, opts.allow_duplicates)
}

/// Slots split into fillable ones (with their candidate lists and
/// precomputed pairwise weights) and unfillable ones.
pub(crate) struct Problem<'a> {
    pub slots: Vec<&'a SlotRef>,
    pub cands: Vec<&'a [CandidateEntity]>,
    pub unary: Vec<Vec<u64>>,
    /// `weights[j][i]` for `i < j`: row-major `|C_i| x |C_j|` matrix.
    weights: Vec<Vec<Vec<f64>>>,
    /// Slot indices sorted by position, for tie-break keys.
    pub by_position: Vec<usize>,
    pub unfillable: Vec<SlotRef>,
}

impl<'a> Problem<'a> {
    pub fn new(slots: &'a [SlotRef], pool: &'a CandidatePool, stats: &CooccurrenceStats) -> Result<Self, QcvError> {
        let mut seen = BTreeSet::new();
        for s in slots {
            if !seen.insert(s.position) {
                return Err(QcvError::DuplicateSlot(s.position));
            }
        }
        let mut fill = Vec::new();
        let mut cands = Vec::new();
        let mut unfillable = Vec::new();
        for s in slots {
            let list = pool.candidates(&s.slot_type);
            if list.is_empty() {
                unfillable.push(s.clone());
            } else {
                fill.push(s);
                cands.push(list);
            }
        }
        let unary = cands
            .iter()
            .map(|list| list.iter().map(|c| unary_of(stats, &c.name)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let mut weights = Vec::with_capacity(cands.len());
        for j in 0..cands.len() {
            let mut row = Vec::with_capacity(j);
            for i in 0..j {
                let mut m = Vec::with_capacity(cands[i].len() * cands[j].len());
                for a in cands[i] {
                    for b in cands[j] {
                        m.push(pair_weight(stats, &a.name, &b.name)?);
                    }
                }
                row.push(m);
            }
            weights.push(row);
        }
        let mut by_position: Vec<usize> = (0..fill.len()).collect();
        by_position.sort_by_key(|&i| fill[i].position);
        Ok(Problem {
            slots: fill,
            cands,
            unary,
            weights,
            by_position,
            unfillable,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    /// Weight between candidate `a` of slot `i` and candidate `b` of slot `j`, `i < j`.
    #[inline]
    pub fn weight(&self, i: usize, a: usize, j: usize, b: usize) -> f64 {
        self.weights[j][i][a * self.cands[j].len() + b]
    }

    /// Weight gained by placing candidate `b` at slot `j` given choices for
    /// slots `0..j`.
    #[inline]
    pub fn gain(&self, prefix: &[usize], j: usize, b: usize) -> f64 {
        prefix.iter().enumerate().map(|(i, &a)| self.weight(i, a, j, b)).sum()
    }

    pub fn name(&self, slot: usize, cand: usize) -> &str {
        &self.cands[slot][cand].name
    }

    /// True if candidate `b` at slot `j` repeats a name from `prefix`.
    pub fn repeats(&self, prefix: &[usize], j: usize, b: usize) -> bool {
        let name = self.name(j, b);
        prefix.iter().enumerate().any(|(i, &a)| self.name(i, a) == name)
    }

    pub fn unary_sum(&self, choice: &[usize]) -> u64 {
        choice.iter().enumerate().map(|(i, &a)| self.unary[i][a]).sum()
    }

    /// Candidate names ordered by slot position, restricted to the slots
    /// chosen so far.
    pub fn name_key(&self, choice: &[usize]) -> Vec<&str> {
        self.by_position
            .iter()
            .filter(|&&i| i < choice.len())
            .map(|&i| self.name(i, choice[i]))
            .collect()
    }

    /// Ordering for co-optimal combinations: `Less` means `x` is preferred.
    pub fn prefer(&self, x: &[usize], y: &[usize]) -> std::cmp::Ordering {
        self.unary_sum(y)
            .cmp(&self.unary_sum(x))
            .then_with(|| self.name_key(x).cmp(&self.name_key(y)))
    }

    pub fn assignment(&self, choice: &[usize], score: f64, ties: usize) -> Assignment {
        Assignment {
            chosen: choice
                .iter()
                .enumerate()
                .map(|(i, &a)| (self.slots[i].position, self.cands[i][a].clone()))
                .collect(),
            unfillable: self.unfillable.clone(),
            score,
            ties,
        }
    }
}
