//! Graphviz export: objects as ellipses, motions as boxes, edges
//! input -> motion -> output.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::model::{FunctionalUnit, ObjectKey, ObjectNode};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn object_label(o: &ObjectNode) -> String {
    let mut label = escape(o.name());
    let states: Vec<&str> = o
        .states()
        .iter()
        .map(String::as_str)
        .filter(|s| !s.is_empty())
        .collect();
    if !states.is_empty() {
        label.push_str("\\n");
        label.push_str(&escape(&states.join(", ")));
    }
    if !o.ingredients().is_empty() {
        let ings: Vec<&str> = o.ingredients().iter().map(String::as_str).collect();
        let _ = write!(label, "\\n{{{}}}", escape(&ings.join(", ")));
    }
    label
}

/// Renders `units` as a DOT digraph. Object nodes are shared between units
/// by identity and ordered by the position of the first unit that mentions
/// them, then by key.
pub fn render_dot(units: &[FunctionalUnit]) -> String {
    let mut first_seen: HashMap<ObjectKey, (usize, &ObjectNode)> = HashMap::new();
    for (pos, unit) in units.iter().enumerate() {
        for o in unit.inputs.iter().chain(&unit.outputs) {
            first_seen.entry(o.key()).or_insert((pos, o));
        }
    }
    let ordered: BTreeMap<(usize, ObjectKey), &ObjectNode> = first_seen
        .into_iter()
        .map(|(k, (pos, o))| ((pos, k), o))
        .collect();
    let ids: HashMap<&ObjectKey, usize> = ordered
        .keys()
        .enumerate()
        .map(|(i, (_, k))| (k, i))
        .collect();

    let mut out = String::from("digraph foon {\n");
    for (i, o) in ordered.values().enumerate() {
        let _ = writeln!(
            out,
            "  o{i} [shape=ellipse, label=\"{}\"];",
            object_label(o)
        );
    }
    for (pos, unit) in units.iter().enumerate() {
        let _ = writeln!(
            out,
            "  m{pos} [shape=box, label=\"{}\"];",
            escape(unit.motion.label())
        );
    }
    for (pos, unit) in units.iter().enumerate() {
        let mut seen = HashSet::new();
        for o in &unit.inputs {
            let id = ids[&o.key()];
            if seen.insert(id) {
                let _ = writeln!(out, "  o{id} -> m{pos};");
            }
        }
        let mut seen = HashSet::new();
        for o in &unit.outputs {
            let id = ids[&o.key()];
            if seen.insert(id) {
                let _ = writeln!(out, "  m{pos} -> o{id};");
            }
        }
    }
    out.push_str("}\n");
    out
}
