//! Nested beam search.
//!
//! Slots are filled in input order. The beam for the next slot is built one
//! pick at a time: before pick `k`, the children of the first `k` parents
//! are in the frontier, and the best remaining child (by partial graph
//! weight, then the usual tie-break) is taken. A wider beam therefore always
//! contains a narrower one, so the returned weight never decreases as the
//! width grows, and a beam at least as wide as the combination space
//! reproduces the exhaustive result.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Assignment, Problem, QcvError, SlotRef, TIE_TOLERANCE};
use crate::candidates::{CandidatePool, CooccurrenceStats};

pub fn solve_beam(
    slots: &[SlotRef],
    pool: &CandidatePool,
    stats: &CooccurrenceStats,
    beam_width: usize,
    allow_duplicates: bool,
) -> Result<Assignment, QcvError> {
    if beam_width == 0 {
        return Err(QcvError::InvalidBeamWidth);
    }
    let problem = Problem::new(slots, pool, stats)?;
    if problem.len() == 0 {
        return Ok(Assignment::empty(problem.unfillable));
    }

    let mut beam = vec![Partial {
        choice: Vec::new(),
        weight: 0.0,
    }];
    for j in 0..problem.len() {
        beam = next_beam(&problem, &beam, j, beam_width, allow_duplicates);
        if beam.is_empty() {
            return Err(QcvError::NoFeasibleAssignment);
        }
    }

    let best = beam.iter().map(|p| p.weight).fold(f64::NEG_INFINITY, f64::max);
    let mut ties = 0;
    let mut winner: Option<&Partial> = None;
    for p in &beam {
        if best - p.weight > TIE_TOLERANCE {
            continue;
        }
        ties += 1;
        if winner.is_none_or(|w| problem.prefer(&p.choice, &w.choice) == Ordering::Less) {
            winner = Some(p);
        }
    }
    let w = winner.expect("beam is non-empty");
    Ok(problem.assignment(&w.choice, w.weight, ties))
}

#[derive(Debug, Clone)]
struct Partial {
    choice: Vec<usize>,
    weight: f64,
}

struct Ranked<'p, 'a> {
    problem: &'p Problem<'a>,
    partial: Partial,
}

impl Ord for Ranked<'_, '_> {
    /// Greater is better: higher weight, then the tie-break preference.
    fn cmp(&self, other: &Self) -> Ordering {
        self.partial
            .weight
            .total_cmp(&other.partial.weight)
            .then_with(|| self.problem.prefer(&other.partial.choice, &self.partial.choice))
    }
}

impl PartialOrd for Ranked<'_, '_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ranked<'_, '_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked<'_, '_> {}

fn next_beam<'p, 'a>(
    problem: &'p Problem<'a>,
    parents: &[Partial],
    j: usize,
    width: usize,
    allow_duplicates: bool,
) -> Vec<Partial> {
    let mut frontier: BinaryHeap<Ranked<'p, 'a>> = BinaryHeap::new();
    let mut expanded = 0;
    let mut picks = Vec::with_capacity(width);
    let expand = |frontier: &mut BinaryHeap<Ranked<'p, 'a>>, parent: &Partial| {
        for b in 0..problem.cands[j].len() {
            if !allow_duplicates && problem.repeats(&parent.choice, j, b) {
                continue;
            }
            let mut choice = parent.choice.clone();
            choice.push(b);
            frontier.push(Ranked {
                problem,
                partial: Partial {
                    weight: parent.weight + problem.gain(&parent.choice, j, b),
                    choice,
                },
            });
        }
    };
    while picks.len() < width {
        // Parents 1..=k must be expanded before pick k.
        while expanded <= picks.len() && expanded < parents.len() {
            expand(&mut frontier, &parents[expanded]);
            expanded += 1;
        }
        // A parent with no admissible children leaves the frontier empty;
        // pull in later parents until something is available.
        while frontier.is_empty() && expanded < parents.len() {
            expand(&mut frontier, &parents[expanded]);
            expanded += 1;
        }
        match frontier.pop() {
            Some(r) => picks.push(r.partial),
            None => break,
        }
    }
    picks
}
