//! Reference tooling for checking the searches: an exhaustive minimum-size
//! oracle and a seeded random instance generator.

use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    FunctionalUnit, Kitchen, MotionNode, MotionRateTable, ObjectKey, ObjectNode, SearchStats,
    UniversalFoon,
};
use crate::retrieval::TaskTree;

/// Default cap on subsets examined by [`oracle_search`].
pub const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle enumeration exceeded its budget of {0} steps")]
    BudgetExceeded(u64),
}

/// Objects derivable from the kitchen by forward chaining over every unit.
pub fn reachable_objects(foon: &UniversalFoon, kitchen: &Kitchen) -> HashSet<ObjectKey> {
    let mut have: HashSet<ObjectKey> = kitchen.iter().map(ObjectNode::key).collect();
    let mut fired = vec![false; foon.len()];
    loop {
        let mut changed = false;
        for (idx, unit) in foon.units().iter().enumerate() {
            if fired[idx] || !unit.inputs.iter().all(|i| have.contains(&i.key())) {
                continue;
            }
            fired[idx] = true;
            for o in &unit.outputs {
                changed |= have.insert(o.key());
            }
        }
        if !changed {
            return have;
        }
    }
}

/// Whether any valid task tree exists, ignoring size.
pub fn is_solvable(foon: &UniversalFoon, goal: &ObjectNode, kitchen: &Kitchen) -> bool {
    reachable_objects(foon, kitchen).contains(&goal.key())
}

/// Lexicographically smallest executable order of `subset` (ascending
/// indices), or `None` if some unit can never run.
fn smallest_order(foon: &UniversalFoon, subset: &[usize], kitchen: &Kitchen) -> Option<Vec<usize>> {
    let mut have: HashSet<ObjectKey> = HashSet::new();
    let mut left: Vec<usize> = subset.to_vec();
    let mut order = Vec::with_capacity(subset.len());
    while !left.is_empty() {
        let pos = left.iter().position(|&idx| {
            foon.unit(idx).inputs.iter().all(|i| {
                let k = i.key();
                kitchen.contains_key(&k) || have.contains(&k)
            })
        })?;
        let idx = left.remove(pos);
        have.extend(foon.unit(idx).outputs.iter().map(ObjectNode::key));
        order.push(idx);
    }
    Some(order)
}

/// Exhaustive search for a valid task tree with the fewest units.
///
/// Subsets are enumerated by increasing size. Because a unit that can run
/// stays runnable as more outputs appear, a subset is executable iff
/// greedily running the lowest-indexed ready unit consumes all of it, and
/// that greedy order is the lexicographically smallest executable order.
/// Among subsets of the minimum size the smallest index sequence wins.
pub fn oracle_search(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &Kitchen,
    max_units: usize,
    budget: u64,
) -> Result<Option<TaskTree>, OracleError> {
    let tree = |order: Vec<usize>| TaskTree {
        units: order.into_iter().map(|i| foon.unit(i).clone()).collect(),
        goal: goal.clone(),
        stats: SearchStats::default(),
    };
    if kitchen.contains(goal) {
        return Ok(Some(tree(Vec::new())));
    }
    let goal_key = goal.key();
    let n = foon.len();
    let mut steps = 0u64;
    for size in 1..=max_units.min(n) {
        let mut best: Option<Vec<usize>> = None;
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            steps += 1;
            if steps > budget {
                return Err(OracleError::BudgetExceeded(budget));
            }
            if combo.iter().any(|&i| foon.unit(i).produces(&goal_key)) {
                if let Some(order) = smallest_order(foon, &combo, kitchen) {
                    if best.as_ref().is_none_or(|b| order < *b) {
                        best = Some(order);
                    }
                }
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
        if let Some(order) = best {
            return Ok(Some(tree(order)));
        }
    }
    Ok(None)
}

/// Advances `combo` to the next k-combination of `0..n` in lexicographic
/// order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub max_units: usize,
    /// Cap on producers per object.
    pub max_branching: usize,
    pub max_inputs_per_unit: usize,
    /// Share of instances that keep a fully stocked kitchen. The rest have
    /// kitchen items pruned until the goal is out of reach.
    pub kitchen_fraction: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_units: 12,
            max_branching: 3,
            max_inputs_per_unit: 3,
            kitchen_fraction: 0.7,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn is_valid(&self) -> bool {
        self.max_units >= 1
            && self.max_branching >= 1
            && self.max_inputs_per_unit >= 1
            && (0.0..=1.0).contains(&self.kitchen_fraction)
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub foon: UniversalFoon,
    pub goal: ObjectNode,
    pub kitchen: Kitchen,
}

const MOTIONS: [&str; 5] = ["pour", "slice", "stir", "mix", "bake"];
const STATES: [&str; 4] = ["raw", "chopped", "mixed", ""];

struct Builder {
    rng: ChaCha8Rng,
    objects: Vec<ObjectNode>,
    base: usize,
    producers: HashMap<ObjectKey, Vec<String>>,
}

impl Builder {
    fn fresh_object(&mut self) -> usize {
        let id = self.objects.len();
        let mut o = ObjectNode::new(&format!("item{id}"))
            .expect("generated names are non-empty")
            .with_motion_tag(if self.rng.gen_bool(0.5) { "1" } else { "0" });
        if self.rng.gen_bool(0.6) {
            o.add_state(STATES[self.rng.gen_range(0..STATES.len())]);
        }
        if self.rng.gen_bool(0.2) {
            o.add_ingredient(&format!("ing{}", self.rng.gen_range(0..3)));
        }
        self.objects.push(o);
        id
    }

    /// Derived objects that can take another producer.
    fn open_derived(&self, max_branching: usize) -> Vec<usize> {
        (self.base..self.objects.len())
            .filter(|&i| {
                let n = self
                    .producers
                    .get(&self.objects[i].key())
                    .map_or(0, Vec::len);
                n >= 1 && n < max_branching
            })
            .collect()
    }

    fn has_multi_producer(&self) -> bool {
        self.producers.values().any(|p| p.len() > 1)
    }
}

/// Builds a random FOON, goal and kitchen as a pure function of `cfg`.
///
/// Units are created in sequence, each consuming objects that already
/// exist, so with the full kitchen every derived object is reachable. Some
/// units re-produce an existing derived object to create alternatives
/// (and occasionally cycles). The goal is an output of the last unit.
pub fn generate_instance(cfg: &GeneratorConfig) -> Instance {
    assert!(cfg.is_valid(), "invalid generator config: {cfg:?}");
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        objects: Vec::new(),
        base: 0,
        producers: HashMap::new(),
    };
    let base = cfg.max_inputs_per_unit.max(2) + b.rng.gen_range(0..=2);
    for _ in 0..base {
        b.fresh_object();
    }
    b.base = base;

    let n_units = b.rng.gen_range(1..=cfg.max_units);
    let mut foon = UniversalFoon::new();
    let mut goal = None;
    for u in 0..n_units {
        let last = u + 1 == n_units;
        let open = b.open_derived(cfg.max_branching);
        let force_alternative =
            last && cfg.max_branching > 1 && !b.has_multi_producer() && !open.is_empty();
        let target = if force_alternative || (!open.is_empty() && b.rng.gen_bool(0.3)) {
            Some(open[b.rng.gen_range(0..open.len())])
        } else {
            None
        };

        let pool: Vec<usize> = (0..b.objects.len())
            .filter(|&i| Some(i) != target)
            .collect();
        let k = b.rng.gen_range(1..=cfg.max_inputs_per_unit.min(pool.len()));
        let inputs: Vec<ObjectNode> = index::sample(&mut b.rng, pool.len(), k)
            .into_iter()
            .map(|i| b.objects[pool[i]].clone())
            .collect();

        let output = match target {
            Some(t) => t,
            None => b.fresh_object(),
        };
        let out_key = b.objects[output].key();
        let taken = b.producers.get(&out_key).cloned().unwrap_or_default();
        let mut free: Vec<&str> = MOTIONS
            .iter()
            .copied()
            .filter(|m| !taken.iter().any(|t| t == m))
            .collect();
        if free.is_empty() {
            free = MOTIONS.to_vec();
        }
        let motion = free[b.rng.gen_range(0..free.len())];

        let mut outputs = vec![b.objects[output].clone()];
        if b.rng.gen_bool(0.2) {
            let by = b.fresh_object();
            outputs.push(b.objects[by].clone());
        }
        let unit = FunctionalUnit::new(
            inputs,
            MotionNode::new(motion).expect("non-empty label"),
            outputs.clone(),
        )
        .expect("inputs and outputs are non-empty");
        if foon.insert_unit(unit) {
            for o in &outputs {
                b.producers
                    .entry(o.key())
                    .or_default()
                    .push(motion.to_string());
            }
        }
        if last {
            goal = Some(b.objects[output].clone());
        }
    }
    let goal = goal.expect("at least one unit is generated");

    let mut kitchen: Kitchen = b.objects[..base].iter().cloned().collect();
    if !b.rng.gen_bool(cfg.kitchen_fraction) {
        let mut items: Vec<ObjectNode> = kitchen.iter().cloned().collect();
        items.shuffle(&mut b.rng);
        for item in items {
            if !is_solvable(&foon, &goal, &kitchen) {
                break;
            }
            kitchen.remove(&item.key());
        }
    }
    Instance {
        foon,
        goal,
        kitchen,
    }
}

/// Random success rates for every motion used in `foon`, drawn in steps of
/// 0.05 so that ties occur.
pub fn generate_rates(foon: &UniversalFoon, seed: u64) -> MotionRateTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let mut labels: Vec<&str> = foon.units().iter().map(|u| u.motion.label()).collect();
    labels.sort_unstable();
    labels.dedup();
    let mut table = MotionRateTable::new();
    for l in labels {
        let rate = rng.gen_range(0..=20) as f64 * 0.05;
        table.set(l, rate.min(1.0)).expect("rate in range");
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::serialize_units;
    use crate::retrieval::{search_ids, validate_task_tree};

    fn obj(n: &str) -> ObjectNode {
        ObjectNode::new(n).unwrap()
    }

    fn unit(i: &[&str], o: &[&str]) -> FunctionalUnit {
        FunctionalUnit::new(
            i.iter().map(|n| obj(n)).collect(),
            MotionNode::new("m").unwrap(),
            o.iter().map(|n| obj(n)).collect(),
        )
        .unwrap()
    }

    /// Every subset, every permutation. Only for tiny FOONs.
    fn power_set_minimum(
        foon: &UniversalFoon,
        goal: &ObjectNode,
        kitchen: &Kitchen,
    ) -> Option<Vec<usize>> {
        fn permute(rest: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                prefix.push(x);
                permute(rest, prefix, out);
                prefix.pop();
                rest.insert(i, x);
            }
        }
        let n = foon.len();
        let mut best: Option<Vec<usize>> = None;
        for mask in 0u32..(1 << n) {
            let mut subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let mut orders = Vec::new();
            permute(&mut subset, &mut Vec::new(), &mut orders);
            for order in orders {
                let units: Vec<FunctionalUnit> =
                    order.iter().map(|&i| foon.unit(i).clone()).collect();
                if validate_task_tree(&units, kitchen, goal).is_ok() {
                    let better = match &best {
                        None => true,
                        Some(b) => (order.len(), &order) < (b.len(), b),
                    };
                    if better {
                        best = Some(order);
                    }
                }
            }
        }
        best
    }

    fn oracle_indices(
        foon: &UniversalFoon,
        goal: &ObjectNode,
        kitchen: &Kitchen,
    ) -> Option<Vec<usize>> {
        oracle_search(foon, goal, kitchen, foon.len(), DEFAULT_ORACLE_BUDGET)
            .unwrap()
            .map(|t| t.units.iter().map(|u| u.source_index).collect())
    }

    #[test]
    fn goal_in_kitchen() {
        let foon: UniversalFoon = [unit(&["a"], &["b"])].into_iter().collect();
        let k: Kitchen = [obj("b")].into_iter().collect();
        assert_eq!(oracle_indices(&foon, &obj("b"), &k), Some(vec![]));
    }

    #[test]
    fn chain_needs_all_three() {
        let foon: UniversalFoon = [
            unit(&["a"], &["b"]),
            unit(&["b"], &["c"]),
            unit(&["c"], &["d"]),
        ]
        .into_iter()
        .collect();
        let k: Kitchen = [obj("a")].into_iter().collect();
        assert_eq!(oracle_indices(&foon, &obj("d"), &k), Some(vec![0, 1, 2]));
        // no shorter subsequence is valid
        for size in 0..3 {
            assert!(
                oracle_search(&foon, &obj("d"), &k, size, DEFAULT_ORACLE_BUDGET)
                    .unwrap()
                    .is_none()
            );
        }
    }

    #[test]
    fn unreachable_goal() {
        let foon: UniversalFoon = [unit(&["a"], &["b"])].into_iter().collect();
        assert_eq!(oracle_indices(&foon, &obj("b"), &Kitchen::new()), None);
        assert_eq!(oracle_indices(&foon, &obj("zz"), &Kitchen::new()), None);
    }

    #[test]
    fn prefers_smaller_tree_then_smaller_indices() {
        let foon: UniversalFoon = [
            unit(&["a"], &["b"]),
            unit(&["b"], &["goal"]),
            unit(&["a"], &["goal"]),
            unit(&["c"], &["goal"]),
        ]
        .into_iter()
        .collect();
        let k: Kitchen = [obj("a"), obj("c")].into_iter().collect();
        assert_eq!(oracle_indices(&foon, &obj("goal"), &k), Some(vec![2]));
    }

    #[test]
    fn budget_is_enforced() {
        let foon: UniversalFoon = (0..10).map(|i| unit(&[&format!("x{i}")], &["y"])).collect();
        assert_eq!(
            oracle_search(&foon, &obj("goal"), &Kitchen::new(), 10, 100).unwrap_err(),
            OracleError::BudgetExceeded(100)
        );
    }

    #[test]
    fn combinations_in_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn oracle_matches_full_power_set_on_small_instances() {
        let cfg = GeneratorConfig {
            max_units: 7,
            max_branching: 3,
            max_inputs_per_unit: 2,
            kitchen_fraction: 0.6,
            seed: 0,
        };
        for seed in 0..60 {
            let inst = generate_instance(&cfg.with_seed(seed));
            assert!(inst.foon.len() <= 8);
            let brute = power_set_minimum(&inst.foon, &inst.goal, &inst.kitchen);
            assert_eq!(
                oracle_indices(&inst.foon, &inst.goal, &inst.kitchen),
                brute,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::default().with_seed(42);
        let a = generate_instance(&cfg);
        let b = generate_instance(&cfg);
        assert_eq!(
            serialize_units(a.foon.units()),
            serialize_units(b.foon.units())
        );
        assert_eq!(a.goal.key(), b.goal.key());
        let ka: Vec<ObjectKey> = a.kitchen.iter().map(ObjectNode::key).collect();
        let kb: Vec<ObjectKey> = b.kitchen.iter().map(ObjectNode::key).collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn single_unit_instance_is_solvable() {
        let cfg = GeneratorConfig {
            max_units: 1,
            kitchen_fraction: 1.0,
            ..GeneratorConfig::default()
        };
        for seed in 0..20 {
            let inst = generate_instance(&cfg.with_seed(seed));
            assert_eq!(inst.foon.len(), 1);
            assert!(inst
                .foon
                .unit(0)
                .inputs
                .iter()
                .all(|i| inst.kitchen.contains(i)));
            assert!(search_ids(&inst.foon, &inst.goal, &inst.kitchen, 50).is_found());
        }
    }

    #[test]
    fn goal_is_produced_and_alternatives_exist() {
        let cfg = GeneratorConfig::default();
        for seed in 0..200 {
            let inst = generate_instance(&cfg.with_seed(seed));
            assert!(!inst.foon.producer_indices(&inst.goal.key()).is_empty());
            assert!(!inst.kitchen.contains(&inst.goal));
            if inst.foon.len() >= 2 {
                assert!(
                    inst.foon.producers().values().any(|p| p.len() > 1),
                    "seed {seed}"
                );
            }
            assert!(inst
                .foon
                .producers()
                .values()
                .all(|p| p.len() <= cfg.max_branching));
        }
    }

    #[test]
    fn solvable_share_tracks_kitchen_fraction() {
        let cfg = GeneratorConfig::default();
        let solvable = (0..1000)
            .filter(|&s| {
                let inst = generate_instance(&cfg.with_seed(s));
                oracle_search(
                    &inst.foon,
                    &inst.goal,
                    &inst.kitchen,
                    inst.foon.len(),
                    DEFAULT_ORACLE_BUDGET,
                )
                .unwrap()
                .is_some()
            })
            .count();
        let share = solvable as f64 / 1000.0;
        assert!(
            (share - cfg.kitchen_fraction).abs() <= 0.10,
            "solvable share {share}"
        );
    }
}
