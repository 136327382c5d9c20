//! Iterative deepening over the AND-OR structure of a FOON.
//!
//! The depth bound counts levels of functional units between the goal and
//! a kitchen leaf. Each iteration is a fresh depth-limited DFS: OR over the
//! producers of an object (first success wins), AND over the inputs of a
//! producer.

use std::collections::{HashMap, HashSet};

use super::{validate_task_tree, FailureReason, SearchFailure, SearchOutcome, TaskTree};
use crate::model::{Kitchen, ObjectKey, ObjectNode, SearchStats, UniversalFoon};

struct Solved {
    plan: Option<Vec<usize>>,
    // a candidate was skipped because it needs an object already on the path
    cycle_cut: bool,
}

struct DepthLimited<'a> {
    foon: &'a UniversalFoon,
    kitchen: &'a Kitchen,
    goal_key: ObjectKey,
    on_path: HashSet<ObjectKey>,
    // (object, budget) pairs known to fail in this iteration regardless of path
    failed: HashSet<(ObjectKey, usize)>,
    hit_depth_bound: bool,
    expansions: u64,
    goal_visits: u64,
    max_stack_depth: usize,
    blocked: Vec<ObjectNode>,
    blocked_keys: HashSet<ObjectKey>,
}

impl<'a> DepthLimited<'a> {
    fn new(foon: &'a UniversalFoon, kitchen: &'a Kitchen, goal: &ObjectNode) -> Self {
        Self {
            foon,
            kitchen,
            goal_key: goal.key(),
            on_path: HashSet::new(),
            failed: HashSet::new(),
            hit_depth_bound: false,
            expansions: 0,
            goal_visits: 0,
            max_stack_depth: 0,
            blocked: Vec::new(),
            blocked_keys: HashSet::new(),
        }
    }

    fn reset_iteration(&mut self) {
        self.on_path.clear();
        self.failed.clear();
        self.hit_depth_bound = false;
        self.expansions = 0;
    }

    fn solve(&mut self, object: &ObjectNode, budget: usize, depth: usize) -> Solved {
        let key = object.key();
        if key == self.goal_key {
            self.goal_visits += 1;
        }
        self.max_stack_depth = self.max_stack_depth.max(depth);

        if self.kitchen.contains_key(&key) {
            return Solved {
                plan: Some(Vec::new()),
                cycle_cut: false,
            };
        }
        let foon = self.foon;
        let producers = foon.producer_indices(&key);
        if producers.is_empty() {
            if self.blocked_keys.insert(key) {
                self.blocked.push(object.clone());
            }
            return Solved {
                plan: None,
                cycle_cut: false,
            };
        }
        if budget == 0 {
            self.hit_depth_bound = true;
            return Solved {
                plan: None,
                cycle_cut: false,
            };
        }
        let memo_key = (key, budget);
        if self.failed.contains(&memo_key) {
            return Solved {
                plan: None,
                cycle_cut: false,
            };
        }

        self.on_path.insert(memo_key.0.clone());
        let mut cycle_cut = false;
        for &idx in producers {
            self.expansions += 1;
            let unit = foon.unit(idx);
            if unit.inputs.iter().any(|i| self.on_path.contains(&i.key())) {
                cycle_cut = true;
                continue;
            }
            let mut plan = Vec::new();
            let mut all_inputs = true;
            for input in &unit.inputs {
                let sub = self.solve(input, budget - 1, depth + 1);
                cycle_cut |= sub.cycle_cut;
                match sub.plan {
                    Some(p) => plan.extend(p),
                    None => {
                        all_inputs = false;
                        break;
                    }
                }
            }
            if all_inputs {
                plan.push(idx);
                self.on_path.remove(&memo_key.0);
                return Solved {
                    plan: Some(plan),
                    cycle_cut,
                };
            }
        }
        self.on_path.remove(&memo_key.0);
        if !cycle_cut {
            self.failed.insert(memo_key);
        }
        Solved {
            plan: None,
            cycle_cut,
        }
    }
}

/// Runs depth-limited searches with bounds `0..=max_depth` and returns the
/// first tree found.
///
/// Units come out in post-order (inputs' subtrees before the unit that
/// consumes them) with repeats dropped, so the result is directly
/// executable.
pub fn search_ids(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
    max_depth: usize,
) -> SearchOutcome {
    let mut search = DepthLimited::new(foon, kitchen, goal);
    let mut stats = SearchStats::default();
    let mut exhausted_early = false;

    for depth in 0..=max_depth {
        search.reset_iteration();
        let result = search.solve(goal, depth, 0);
        stats.per_depth_expansions.push(search.expansions);
        stats.expansions += search.expansions;
        stats.depth_limit_reached = depth;

        if let Some(plan) = result.plan {
            let mut seen = HashSet::new();
            let units: Vec<_> = plan
                .into_iter()
                .filter(|idx| seen.insert(*idx))
                .map(|idx| foon.unit(idx).clone())
                .collect();
            debug_assert!(validate_task_tree(&units, kitchen, goal).is_ok());
            stats.goal_visits = search.goal_visits;
            stats.max_stack_depth = search.max_stack_depth;
            return SearchOutcome::Found(TaskTree {
                units,
                goal: goal.clone(),
                stats,
            });
        }
        // Without a single depth cutoff a larger bound explores the same space.
        if !search.hit_depth_bound {
            exhausted_early = true;
            break;
        }
    }

    stats.goal_visits = search.goal_visits;
    stats.max_stack_depth = search.max_stack_depth;
    let reason = if foon.producer_indices(&goal.key()).is_empty() {
        FailureReason::GoalUnreachable
    } else if exhausted_early {
        FailureReason::UnsatisfiedLeaves
    } else {
        FailureReason::DepthExhausted { max_depth }
    };
    SearchOutcome::Failed(SearchFailure {
        reason,
        blocked_objects: search.blocked,
        stats,
    })
}

/// Visits per object over a whole IDS run, without failure memoization:
/// the plain depth-limited recursion, tallied.
pub fn visit_counts(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
    max_depth: usize,
) -> HashMap<ObjectKey, u64> {
    struct Tally<'a> {
        inner: DepthLimited<'a>,
        counts: HashMap<ObjectKey, u64>,
    }
    impl Tally<'_> {
        fn solve(&mut self, object: &ObjectNode, budget: usize) -> bool {
            let key = object.key();
            *self.counts.entry(key.clone()).or_default() += 1;
            if self.inner.kitchen.contains_key(&key) {
                return true;
            }
            if budget == 0 {
                return false;
            }
            let foon = self.inner.foon;
            self.inner.on_path.insert(key.clone());
            let mut ok = false;
            for &idx in foon.producer_indices(&key) {
                let unit = foon.unit(idx);
                if unit
                    .inputs
                    .iter()
                    .any(|i| self.inner.on_path.contains(&i.key()))
                {
                    continue;
                }
                if unit.inputs.iter().all(|i| self.solve(i, budget - 1)) {
                    ok = true;
                    break;
                }
            }
            self.inner.on_path.remove(&key);
            ok
        }
    }
    let mut tally = Tally {
        inner: DepthLimited::new(foon, kitchen, goal),
        counts: HashMap::new(),
    };
    for depth in 0..=max_depth {
        tally.inner.on_path.clear();
        if tally.solve(goal, depth) {
            break;
        }
    }
    tally.counts
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::retrieval::validate_task_tree;

    fn indices(tree: &TaskTree) -> Vec<usize> {
        tree.units.iter().map(|u| u.source_index).collect()
    }

    #[test]
    fn goal_in_kitchen() {
        let (foon, _) = chain();
        let out = search_ids(&foon, &obj("a"), &kitchen(&["a"]), 50);
        let tree = out.tree().unwrap();
        assert!(tree.is_empty());
        assert_eq!(tree.stats.depth_limit_reached, 0);
        assert_eq!(tree.stats.per_depth_expansions, vec![0]);
    }

    #[test]
    fn chain_found_at_depth_three() {
        let (foon, k) = chain();
        let tree = search_ids(&foon, &obj("d"), &k, 50)
            .tree()
            .cloned()
            .unwrap();
        assert_eq!(indices(&tree), vec![0, 1, 2]);
        assert_eq!(tree.stats.depth_limit_reached, 3);
        assert_eq!(tree.stats.per_depth_expansions, vec![0, 1, 2, 3]);
        assert_eq!(tree.stats.expansions, 6);
        assert_eq!(tree.stats.goal_visits, 4);
        assert_eq!(tree.stats.max_stack_depth, 3);
    }

    #[test]
    fn depth_bound_too_small() {
        let (foon, k) = chain();
        let out = search_ids(&foon, &obj("d"), &k, 2);
        let f = out.failure().unwrap();
        assert_eq!(f.reason, FailureReason::DepthExhausted { max_depth: 2 });
        assert_eq!(f.stats.per_depth_expansions.len(), 3);
    }

    #[test]
    fn no_producer() {
        let (foon, k) = chain();
        let out = search_ids(&foon, &obj("zzz"), &k, 50);
        let f = out.failure().unwrap();
        assert_eq!(f.reason, FailureReason::GoalUnreachable);
        assert_eq!(f.blocked_objects, vec![obj("zzz")]);
        assert_eq!(f.stats.per_depth_expansions, vec![0]);
    }

    #[test]
    fn missing_leaf_stops_before_max_depth() {
        let (foon, _) = chain();
        let out = search_ids(&foon, &obj("d"), &kitchen(&[]), 50);
        let f = out.failure().unwrap();
        assert_eq!(f.reason, FailureReason::UnsatisfiedLeaves);
        assert_eq!(f.blocked_objects, vec![obj("a")]);
        assert!(f.stats.depth_limit_reached < 50);
    }

    #[test]
    fn first_working_candidate_wins() {
        let foon: UniversalFoon = [
            unit(&["missing"], "m", &["goal"]),
            unit(&["x"], "first", &["goal"]),
            unit(&["y"], "second", &["goal"]),
        ]
        .into_iter()
        .collect();
        let tree = search_ids(&foon, &obj("goal"), &kitchen(&["x", "y"]), 5)
            .tree()
            .cloned()
            .unwrap();
        assert_eq!(indices(&tree), vec![1]);
    }

    #[test]
    fn shared_subgoal_appears_once() {
        let foon: UniversalFoon = [
            unit(&["raw"], "prep", &["base"]),
            unit(&["base"], "left", &["l"]),
            unit(&["base"], "right", &["r"]),
            unit(&["l", "r"], "join", &["goal"]),
        ]
        .into_iter()
        .collect();
        let k = kitchen(&["raw"]);
        let tree = search_ids(&foon, &obj("goal"), &k, 10)
            .tree()
            .cloned()
            .unwrap();
        assert_eq!(indices(&tree), vec![0, 1, 2, 3]);
        assert!(validate_task_tree(&tree.units, &k, &obj("goal")).is_ok());
    }

    #[test]
    fn cycles_are_skipped() {
        let foon: UniversalFoon = [
            unit(&["b"], "m", &["a"]),
            unit(&["a"], "m", &["b"]),
            unit(&["x"], "m", &["b"]),
        ]
        .into_iter()
        .collect();
        let tree = search_ids(&foon, &obj("a"), &kitchen(&["x"]), 10)
            .tree()
            .cloned()
            .unwrap();
        assert_eq!(indices(&tree), vec![2, 0]);

        let out = search_ids(&foon, &obj("a"), &kitchen(&[]), 10);
        assert_eq!(
            out.failure().unwrap().reason,
            FailureReason::UnsatisfiedLeaves
        );
    }

    #[test]
    fn root_visited_once_per_iteration() {
        let (foon, k) = chain();
        let counts = visit_counts(&foon, &obj("d"), &k, 50);
        assert_eq!(counts[&obj("d").key()], 4);
        assert_eq!(counts[&obj("c").key()], 3);
        assert_eq!(counts[&obj("b").key()], 2);
        assert_eq!(counts[&obj("a").key()], 1);
    }
}
