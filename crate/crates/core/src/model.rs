//! Core FOON types: object nodes, motion nodes, functional units and the
//! deduplicated universal network built from them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("object node has an empty name")]
    EmptyObjectName,
    #[error("motion node has an empty label")]
    EmptyMotionLabel,
    #[error("functional unit has no input objects")]
    NoInputs,
    #[error("functional unit has no output objects")]
    NoOutputs,
    #[error("success rate {rate} for motion `{label}` is outside [0, 1]")]
    RateOutOfRange { label: String, rate: f64 },
}

/// Lowercases and trims a label the way every identity-bearing string is
/// normalized before keying.
pub fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

fn escape_into(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '%' => out.push_str("%25"),
            '|' => out.push_str("%7C"),
            ';' => out.push_str("%3B"),
            c => out.push(c),
        }
    }
}

/// Canonical identity of an [`ObjectNode`].
///
/// Layout is `name|state;state;|ingredient;ingredient;` with both lists
/// sorted. Each list element carries its own terminator so that an empty
/// state set and a set holding only the empty state get different keys.
/// `%`, `|` and `;` inside components are percent-escaped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectKey(String);

impl ObjectKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An object in the environment, identified by name, states and contained
/// ingredients. The `motion_tag` column is carried along but never compared.
#[derive(Debug, Clone)]
pub struct ObjectNode {
    name: String,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
    motion_tag: String,
}

impl ObjectNode {
    pub fn new(name: &str) -> Result<Self, ModelError> {
        let name = normalize(name);
        if name.is_empty() {
            return Err(ModelError::EmptyObjectName);
        }
        Ok(Self {
            name,
            states: BTreeSet::new(),
            ingredients: BTreeSet::new(),
            motion_tag: String::new(),
        })
    }

    /// Adds a state. An empty (or all-whitespace) state is kept as the
    /// distinct empty state.
    pub fn add_state(&mut self, state: &str) {
        self.states.insert(normalize(state));
    }

    /// Adds an ingredient; blank ingredient names are dropped.
    pub fn add_ingredient(&mut self, ingredient: &str) {
        let ingredient = normalize(ingredient);
        if !ingredient.is_empty() {
            self.ingredients.insert(ingredient);
        }
    }

    pub fn with_states<'a>(mut self, states: impl IntoIterator<Item = &'a str>) -> Self {
        for s in states {
            self.add_state(s);
        }
        self
    }

    pub fn with_ingredients<'a>(mut self, ingredients: impl IntoIterator<Item = &'a str>) -> Self {
        for i in ingredients {
            self.add_ingredient(i);
        }
        self
    }

    pub fn with_motion_tag(mut self, tag: &str) -> Self {
        self.motion_tag = tag.trim().to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn ingredients(&self) -> &BTreeSet<String> {
        &self.ingredients
    }

    pub fn motion_tag(&self) -> &str {
        &self.motion_tag
    }

    pub fn key(&self) -> ObjectKey {
        object_key(self)
    }

    /// Field-for-field equality, including the motion tag.
    pub fn same_fields(&self, other: &ObjectNode) -> bool {
        self == other && self.motion_tag == other.motion_tag
    }
}

impl PartialEq for ObjectNode {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.ingredients == other.ingredients
    }
}

impl Eq for ObjectNode {}

impl std::hash::Hash for ObjectNode {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.states.hash(state);
        self.ingredients.hash(state);
    }
}

impl fmt::Display for ObjectNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.states.is_empty() {
            let states: Vec<&str> = self.states.iter().map(String::as_str).collect();
            write!(f, " [{}]", states.join(", "))?;
        }
        if !self.ingredients.is_empty() {
            let ings: Vec<&str> = self.ingredients.iter().map(String::as_str).collect();
            write!(f, " {{{}}}", ings.join(","))?;
        }
        Ok(())
    }
}

pub fn object_key(o: &ObjectNode) -> ObjectKey {
    let mut key = String::with_capacity(o.name.len() + 8);
    escape_into(&mut key, &o.name);
    key.push('|');
    for s in &o.states {
        escape_into(&mut key, s);
        key.push(';');
    }
    key.push('|');
    for i in &o.ingredients {
        escape_into(&mut key, i);
        key.push(';');
    }
    ObjectKey(key)
}

/// A motion label. Timestamps are kept for reference only.
#[derive(Debug, Clone)]
pub struct MotionNode {
    label: String,
    pub start_time: Option<String>,
    pub end_time: Option<String>,
}

impl MotionNode {
    pub fn new(label: &str) -> Result<Self, ModelError> {
        let label = normalize(label);
        if label.is_empty() {
            return Err(ModelError::EmptyMotionLabel);
        }
        Ok(Self {
            label,
            start_time: None,
            end_time: None,
        })
    }

    pub fn with_times(mut self, start: Option<&str>, end: Option<&str>) -> Self {
        let clean = |t: Option<&str>| {
            t.map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
        };
        self.start_time = clean(start);
        self.end_time = clean(end);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn same_fields(&self, other: &MotionNode) -> bool {
        self.label == other.label
            && self.start_time == other.start_time
            && self.end_time == other.end_time
    }
}

impl PartialEq for MotionNode {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

impl Eq for MotionNode {}

/// Identity of a functional unit: input key set, motion label, output key set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitKey {
    inputs: Vec<ObjectKey>,
    motion: String,
    outputs: Vec<ObjectKey>,
}

fn key_set(objects: &[ObjectNode]) -> Vec<ObjectKey> {
    let set: BTreeSet<ObjectKey> = objects.iter().map(object_key).collect();
    set.into_iter().collect()
}

/// The atomic planning operator: inputs are consumed by the motion to
/// produce the outputs.
#[derive(Debug, Clone)]
pub struct FunctionalUnit {
    pub inputs: Vec<ObjectNode>,
    pub motion: MotionNode,
    pub outputs: Vec<ObjectNode>,
    /// Insertion ordinal; assigned by [`UniversalFoon::insert_unit`].
    pub source_index: usize,
}

impl FunctionalUnit {
    pub fn new(
        inputs: Vec<ObjectNode>,
        motion: MotionNode,
        outputs: Vec<ObjectNode>,
    ) -> Result<Self, ModelError> {
        if inputs.is_empty() {
            return Err(ModelError::NoInputs);
        }
        if outputs.is_empty() {
            return Err(ModelError::NoOutputs);
        }
        Ok(Self {
            inputs,
            motion,
            outputs,
            source_index: 0,
        })
    }

    pub fn key(&self) -> UnitKey {
        UnitKey {
            inputs: key_set(&self.inputs),
            motion: self.motion.label.clone(),
            outputs: key_set(&self.outputs),
        }
    }

    pub fn produces(&self, key: &ObjectKey) -> bool {
        self.outputs.iter().any(|o| &o.key() == key)
    }

    /// Field-for-field equality used by round-trip checks: same objects in
    /// the same order with the same tags, same motion with the same times.
    pub fn same_fields(&self, other: &FunctionalUnit) -> bool {
        fn same(a: &[ObjectNode], b: &[ObjectNode]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_fields(y))
        }
        same(&self.inputs, &other.inputs)
            && same(&self.outputs, &other.outputs)
            && self.motion.same_fields(&other.motion)
    }
}

pub fn unit_equals(a: &FunctionalUnit, b: &FunctionalUnit) -> bool {
    a.key() == b.key()
}

/// Union of subgraphs with duplicate units removed.
///
/// Units keep first-insertion order; `source_index` equals the position in
/// [`UniversalFoon::units`].
#[derive(Debug, Clone, Default)]
pub struct UniversalFoon {
    units: Vec<FunctionalUnit>,
    index: HashMap<UnitKey, usize>,
    producers: HashMap<ObjectKey, Vec<usize>>,
}

impl UniversalFoon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `unit` unless an equal unit is already present. Returns
    /// whether the unit was added.
    pub fn insert_unit(&mut self, mut unit: FunctionalUnit) -> bool {
        let key = unit.key();
        if self.index.contains_key(&key) {
            return false;
        }
        let idx = self.units.len();
        unit.source_index = idx;
        for out in key.outputs.iter() {
            self.producers.entry(out.clone()).or_default().push(idx);
        }
        self.index.insert(key, idx);
        self.units.push(unit);
        true
    }

    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn unit(&self, idx: usize) -> &FunctionalUnit {
        &self.units[idx]
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn contains_unit(&self, unit: &FunctionalUnit) -> bool {
        self.index.contains_key(&unit.key())
    }

    /// Indices of the units that have `key` among their outputs, in
    /// insertion order.
    pub fn producer_indices(&self, key: &ObjectKey) -> &[usize] {
        self.producers.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn units_producing(&self, goal: &ObjectNode) -> Vec<&FunctionalUnit> {
        self.producer_indices(&goal.key())
            .iter()
            .map(|&i| &self.units[i])
            .collect()
    }

    pub fn producers(&self) -> &HashMap<ObjectKey, Vec<usize>> {
        &self.producers
    }

    /// Recomputes the producer index by scanning every unit.
    pub fn rebuild_producers(&self) -> HashMap<ObjectKey, Vec<usize>> {
        let mut map: HashMap<ObjectKey, Vec<usize>> = HashMap::new();
        for (idx, unit) in self.units.iter().enumerate() {
            for out in key_set(&unit.outputs) {
                map.entry(out).or_default().push(idx);
            }
        }
        map
    }
}

impl FromIterator<FunctionalUnit> for UniversalFoon {
    fn from_iter<I: IntoIterator<Item = FunctionalUnit>>(iter: I) -> Self {
        let mut foon = UniversalFoon::new();
        for u in iter {
            foon.insert_unit(u);
        }
        foon
    }
}

/// Objects available in the environment.
#[derive(Debug, Clone, Default)]
pub struct Kitchen {
    items: BTreeMap<ObjectKey, ObjectNode>,
}

impl Kitchen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: ObjectNode) -> bool {
        let key = item.key();
        if self.items.contains_key(&key) {
            return false;
        }
        self.items.insert(key, item);
        true
    }

    pub fn remove(&mut self, key: &ObjectKey) -> Option<ObjectNode> {
        self.items.remove(key)
    }

    pub fn contains(&self, item: &ObjectNode) -> bool {
        self.items.contains_key(&item.key())
    }

    pub fn contains_key(&self, key: &ObjectKey) -> bool {
        self.items.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items in key order.
    pub fn iter(&self) -> impl Iterator<Item = &ObjectNode> {
        self.items.values()
    }
}

impl FromIterator<ObjectNode> for Kitchen {
    fn from_iter<I: IntoIterator<Item = ObjectNode>>(iter: I) -> Self {
        let mut k = Kitchen::new();
        for o in iter {
            k.insert(o);
        }
        k
    }
}

/// Per-motion success rates used by the rate-greedy search.
#[derive(Debug, Clone)]
pub struct MotionRateTable {
    rates: BTreeMap<String, f64>,
    default_rate: f64,
}

impl Default for MotionRateTable {
    fn default() -> Self {
        Self {
            rates: BTreeMap::new(),
            default_rate: 1.0,
        }
    }
}

impl MotionRateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_default(default_rate: f64) -> Result<Self, ModelError> {
        check_rate("<default>", default_rate)?;
        Ok(Self {
            rates: BTreeMap::new(),
            default_rate,
        })
    }

    pub fn set(&mut self, label: &str, rate: f64) -> Result<(), ModelError> {
        let label = normalize(label);
        check_rate(&label, rate)?;
        self.rates.insert(label, rate);
        Ok(())
    }

    pub fn rate(&self, label: &str) -> f64 {
        self.rates.get(label).copied().unwrap_or(self.default_rate)
    }

    pub fn default_rate(&self) -> f64 {
        self.default_rate
    }

    pub fn rates(&self) -> &BTreeMap<String, f64> {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

fn check_rate(label: &str, rate: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&rate) {
        Ok(())
    } else {
        Err(ModelError::RateOutOfRange {
            label: label.to_string(),
            rate,
        })
    }
}

/// One greedy selection: which candidate won for which object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionEvent {
    pub object: ObjectKey,
    pub candidates: Vec<usize>,
    pub chosen: usize,
}

/// Search instrumentation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Candidate-unit expansions over the whole search.
    pub expansions: u64,
    /// Deepest recursion (IDS) or queue-driven level (greedy) reached.
    pub max_stack_depth: usize,
    /// Final depth bound used by IDS; zero for the greedy searches.
    pub depth_limit_reached: usize,
    /// IDS only: candidate expansions for each depth bound tried.
    pub per_depth_expansions: Vec<u64>,
    /// IDS only: how many times the goal object was visited, summed over
    /// all iterations (once per depth bound).
    pub goal_visits: u64,
    /// Greedy only: one entry per selection made.
    pub selections: Vec<SelectionEvent>,
}
