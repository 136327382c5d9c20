//! Task-tree retrieval: iterative deepening and two greedy best-first
//! searches, plus the validity check every returned tree must pass.

mod greedy;
mod ids;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::model::{
    FunctionalUnit, Kitchen, MotionRateTable, ObjectKey, ObjectNode, SearchStats, UniversalFoon,
};

pub use greedy::{search_gbfs_inputs, search_gbfs_rate};
pub use ids::{search_ids, visit_counts};

/// Depth bound used when the caller does not pick one.
pub const DEFAULT_MAX_DEPTH: usize = 50;

/// An executable sequence of units that yields `goal`.
#[derive(Debug, Clone)]
pub struct TaskTree {
    pub units: Vec<FunctionalUnit>,
    pub goal: ObjectNode,
    pub stats: SearchStats,
}

impl TaskTree {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

pub fn tree_size(tree: &TaskTree) -> usize {
    tree.units.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// The goal is not in the kitchen and nothing produces it.
    GoalUnreachable,
    /// Every depth bound up to `max_depth` was tried without success.
    DepthExhausted { max_depth: usize },
    /// Some required object can neither be taken from the kitchen nor made.
    UnsatisfiedLeaves,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::GoalUnreachable => f.write_str("GoalUnreachable"),
            FailureReason::DepthExhausted { max_depth } => {
                write!(f, "DepthExhausted (max depth {max_depth})")
            }
            FailureReason::UnsatisfiedLeaves => f.write_str("UnsatisfiedLeaves"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchFailure {
    pub reason: FailureReason,
    pub blocked_objects: Vec<ObjectNode>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(TaskTree),
    Failed(SearchFailure),
}

impl SearchOutcome {
    pub fn tree(&self) -> Option<&TaskTree> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            SearchOutcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&SearchFailure> {
        match self {
            SearchOutcome::Found(_) => None,
            SearchOutcome::Failed(f) => Some(f),
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchOutcome::Found(t) => &t.stats,
            SearchOutcome::Failed(f) => &f.stats,
        }
    }
}

/// First problem found in a candidate task tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Unit position whose input is missing; `None` when the goal itself is
    /// never produced.
    pub position: Option<usize>,
    pub object: ObjectNode,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(
                f,
                "unit {p} needs `{}`, which is neither in the kitchen nor made earlier",
                self.object
            ),
            None => write!(f, "goal `{}` is never produced", self.object),
        }
    }
}

/// Checks that every input of every unit is in the kitchen or produced by an
/// earlier unit, and that the goal is produced or already available.
pub fn validate_task_tree(
    units: &[FunctionalUnit],
    kitchen: &Kitchen,
    goal: &ObjectNode,
) -> Result<(), Violation> {
    let mut produced: HashSet<ObjectKey> = HashSet::new();
    for (pos, unit) in units.iter().enumerate() {
        for input in &unit.inputs {
            let key = input.key();
            if !kitchen.contains_key(&key) && !produced.contains(&key) {
                return Err(Violation {
                    position: Some(pos),
                    object: input.clone(),
                });
            }
        }
        produced.extend(unit.outputs.iter().map(ObjectNode::key));
    }
    let goal_key = goal.key();
    if produced.contains(&goal_key) || kitchen.contains_key(&goal_key) {
        Ok(())
    } else {
        Err(Violation {
            position: None,
            object: goal.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ids,
    GbfsRate,
    GbfsInputs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ids, Algorithm::GbfsRate, Algorithm::GbfsInputs];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ids => "ids",
            Algorithm::GbfsRate => "gbfs-rate",
            Algorithm::GbfsInputs => "gbfs-inputs",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ids" => Ok(Algorithm::Ids),
            "gbfs-rate" => Ok(Algorithm::GbfsRate),
            "gbfs-inputs" => Ok(Algorithm::GbfsInputs),
            other => Err(format!(
                "unknown algorithm `{other}` (expected ids, gbfs-rate or gbfs-inputs)"
            )),
        }
    }
}

pub fn search(
    algo: Algorithm,
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
    rates: &MotionRateTable,
    max_depth: usize,
) -> SearchOutcome {
    match algo {
        Algorithm::Ids => search_ids(foon, goal, kitchen, max_depth),
        Algorithm::GbfsRate => search_gbfs_rate(foon, goal, kitchen, rates),
        Algorithm::GbfsInputs => search_gbfs_inputs(foon, goal, kitchen),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::{FunctionalUnit, Kitchen, MotionNode, ObjectNode, UniversalFoon};

    pub fn obj(name: &str) -> ObjectNode {
        ObjectNode::new(name).unwrap()
    }

    pub fn unit(inputs: &[&str], motion: &str, outputs: &[&str]) -> FunctionalUnit {
        FunctionalUnit::new(
            inputs.iter().map(|n| obj(n)).collect(),
            MotionNode::new(motion).unwrap(),
            outputs.iter().map(|n| obj(n)).collect(),
        )
        .unwrap()
    }

    pub fn kitchen(names: &[&str]) -> Kitchen {
        names.iter().map(|n| obj(n)).collect()
    }

    /// a -> b -> c -> d, each by its own unit; `a` is in the kitchen.
    pub fn chain() -> (UniversalFoon, Kitchen) {
        let foon = [
            unit(&["a"], "m1", &["b"]),
            unit(&["b"], "m2", &["c"]),
            unit(&["c"], "m3", &["d"]),
        ]
        .into_iter()
        .collect();
        (foon, kitchen(&["a"]))
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn empty_tree_with_goal_in_kitchen() {
        assert!(validate_task_tree(&[], &kitchen(&["ice"]), &obj("ice")).is_ok());
    }

    #[test]
    fn missing_input_reported_at_position_zero() {
        let u = unit(&["water"], "freeze", &["ice"]);
        let err = validate_task_tree(&[u], &kitchen(&[]), &obj("ice")).unwrap_err();
        assert_eq!(err.position, Some(0));
        assert_eq!(err.object, obj("water"));
    }

    #[test]
    fn goal_never_produced() {
        let u = unit(&["water"], "pour", &["glass"]);
        let err = validate_task_tree(&[u], &kitchen(&["water"]), &obj("ice")).unwrap_err();
        assert_eq!(err.position, None);
    }

    #[test]
    fn order_matters() {
        let (foon, k) = chain();
        let mut units = foon.units().to_vec();
        assert!(validate_task_tree(&units, &k, &obj("d")).is_ok());
        units.swap(0, 1);
        assert_eq!(
            validate_task_tree(&units, &k, &obj("d"))
                .unwrap_err()
                .position,
            Some(0)
        );
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("bfs".parse::<Algorithm>().is_err());
    }
}
