//! Queue-driven greedy retrieval. Each object that is not in the kitchen
//! gets exactly one producer, picked by a local score; there is no
//! backtracking.

use std::collections::{HashSet, VecDeque};

use super::{validate_task_tree, FailureReason, SearchFailure, SearchOutcome, TaskTree};
use crate::model::{
    FunctionalUnit, Kitchen, MotionRateTable, ObjectKey, ObjectNode, SearchStats, SelectionEvent,
    UniversalFoon,
};

/// Picks the unit with the highest motion success rate. Ties go to the
/// lowest `source_index`.
pub fn search_gbfs_rate(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
    rates: &MotionRateTable,
) -> SearchOutcome {
    greedy(foon, goal, kitchen, |candidates| {
        let mut best = None;
        let mut max = -1.0;
        for &idx in candidates {
            let rate = rates.rate(foon.unit(idx).motion.label());
            if rate > max {
                max = rate;
                best = Some(idx);
            }
        }
        best.expect("candidate list is non-empty")
    })
}

/// Picks the unit with the fewest input objects. Ties go to the lowest
/// `source_index`.
pub fn search_gbfs_inputs(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
) -> SearchOutcome {
    greedy(foon, goal, kitchen, |candidates| {
        *candidates
            .iter()
            .min_by_key(|&&idx| (foon.unit(idx).inputs.len(), idx))
            .expect("candidate list is non-empty")
    })
}

fn greedy(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
    select: impl Fn(&[usize]) -> usize,
) -> SearchOutcome {
    let mut stats = SearchStats::default();
    let mut queue: VecDeque<(ObjectNode, usize)> = VecDeque::new();
    let mut visited: HashSet<ObjectKey> = HashSet::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_set: HashSet<usize> = HashSet::new();
    let mut blocked: Vec<ObjectNode> = Vec::new();

    visited.insert(goal.key());
    queue.push_back((goal.clone(), 0));

    while let Some((object, level)) = queue.pop_front() {
        stats.max_stack_depth = stats.max_stack_depth.max(level);
        let key = object.key();
        if kitchen.contains_key(&key) {
            continue;
        }
        let candidates = foon.producer_indices(&key);
        if candidates.is_empty() {
            blocked.push(object);
            continue;
        }
        stats.expansions += candidates.len() as u64;
        let best = select(candidates);
        stats.selections.push(SelectionEvent {
            object: key,
            candidates: candidates.to_vec(),
            chosen: best,
        });
        if chosen_set.insert(best) {
            chosen.push(best);
        }
        for input in &foon.unit(best).inputs {
            if visited.insert(input.key()) {
                queue.push_back((input.clone(), level + 1));
            }
        }
    }

    if !blocked.is_empty() {
        let reason = if blocked[0] == *goal {
            FailureReason::GoalUnreachable
        } else {
            FailureReason::UnsatisfiedLeaves
        };
        return SearchOutcome::Failed(SearchFailure {
            reason,
            blocked_objects: blocked,
            stats,
        });
    }

    chosen.reverse();
    let units = match executable_order(foon, &chosen, kitchen) {
        Ok(units) => units,
        Err(blocked_objects) => {
            return SearchOutcome::Failed(SearchFailure {
                reason: FailureReason::UnsatisfiedLeaves,
                blocked_objects,
                stats,
            })
        }
    };
    if let Err(v) = validate_task_tree(&units, kitchen, goal) {
        return SearchOutcome::Failed(SearchFailure {
            reason: FailureReason::UnsatisfiedLeaves,
            blocked_objects: vec![v.object],
            stats,
        });
    }
    SearchOutcome::Found(TaskTree {
        units,
        goal: goal.clone(),
        stats,
    })
}

/// Stable dependency sort: repeatedly emits the first remaining unit (in
/// `order`) whose inputs are all available. On a stall, returns the
/// unavailable inputs of the first remaining unit.
fn executable_order(
    foon: &UniversalFoon,
    order: &[usize],
    kitchen: &Kitchen,
) -> Result<Vec<FunctionalUnit>, Vec<ObjectNode>> {
    let mut remaining: Vec<usize> = order.to_vec();
    let mut available: HashSet<ObjectKey> = HashSet::new();
    let mut out = Vec::with_capacity(order.len());
    let ready = |idx: usize, available: &HashSet<ObjectKey>| {
        foon.unit(idx).inputs.iter().all(|i| {
            let k = i.key();
            kitchen.contains_key(&k) || available.contains(&k)
        })
    };

    while !remaining.is_empty() {
        let Some(pos) = remaining.iter().position(|&idx| ready(idx, &available)) else {
            let stuck = foon.unit(remaining[0]);
            let mut seen = HashSet::new();
            let missing = stuck
                .inputs
                .iter()
                .filter(|i| {
                    let k = i.key();
                    !kitchen.contains_key(&k) && !available.contains(&k) && seen.insert(k)
                })
                .cloned()
                .collect();
            return Err(missing);
        };
        let idx = remaining.remove(pos);
        let unit = foon.unit(idx);
        available.extend(unit.outputs.iter().map(ObjectNode::key));
        out.push(unit.clone());
    }
    Ok(out)
}
