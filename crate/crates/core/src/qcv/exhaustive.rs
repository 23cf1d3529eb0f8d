use std::cmp::Ordering;

use super::{Assignment, Problem, QcvError, SlotRef, TIE_TOLERANCE};
use crate::candidates::{CandidatePool, CooccurrenceStats};

/// Depth-first enumeration of every combination with incremental weights.
///
/// The first pass finds the maximum graph weight; the second counts the
/// combinations within [`TIE_TOLERANCE`] of it and keeps the preferred one.
/// Two passes keep the result independent of enumeration order.
pub fn solve_exhaustive(
    slots: &[SlotRef],
    pool: &CandidatePool,
    stats: &CooccurrenceStats,
    allow_duplicates: bool,
) -> Result<Assignment, QcvError> {
    let problem = Problem::new(slots, pool, stats)?;
    if problem.len() == 0 {
        return Ok(Assignment::empty(problem.unfillable));
    }

    let mut best = f64::NEG_INFINITY;
    walk(&problem, allow_duplicates, &mut Vec::new(), 0.0, &mut |_, w| {
        if w > best {
            best = w;
        }
    });
    if best == f64::NEG_INFINITY {
        return Err(QcvError::NoFeasibleAssignment);
    }

    let mut winner: Option<(Vec<usize>, f64)> = None;
    let mut ties = 0;
    walk(&problem, allow_duplicates, &mut Vec::new(), 0.0, &mut |choice, w| {
        if best - w > TIE_TOLERANCE {
            return;
        }
        ties += 1;
        let better = match &winner {
            None => true,
            Some((cur, _)) => problem.prefer(choice, cur) == Ordering::Less,
        };
        if better {
            winner = Some((choice.to_vec(), w));
        }
    });
    let (choice, score) = winner.expect("first pass found a combination");
    Ok(problem.assignment(&choice, score, ties))
}

fn walk(
    problem: &Problem<'_>,
    allow_duplicates: bool,
    prefix: &mut Vec<usize>,
    weight: f64,
    visit: &mut dyn FnMut(&[usize], f64),
) {
    let j = prefix.len();
    if j == problem.len() {
        visit(prefix, weight);
        return;
    }
    for b in 0..problem.cands[j].len() {
        if !allow_duplicates && problem.repeats(prefix, j, b) {
            continue;
        }
        let w = weight + problem.gain(prefix, j, b);
        prefix.push(b);
        walk(problem, allow_duplicates, prefix, w, visit);
        prefix.pop();
    }
}
