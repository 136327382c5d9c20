//! Text formats: subgraph files, kitchen files, motion-rate files and goal
//! specs.
//!
//! Subgraph grammar, one record per line, fields separated by tabs:
//!
//! ```text
//! O<TAB>name<TAB>tag                 open an object block
//! S<TAB>state[<TAB>{ing,ing,...}]    attach a state (and ingredients)
//! M<TAB>label[<TAB>start<TAB>end]    the motion; objects after it are outputs
//! //                                 end of unit
//! ```
//!
//! A bare `S` line adds the empty state. `S<TAB><TAB>{...}` carries
//! ingredients without adding a state. Blank lines and `#` comments are
//! skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{FunctionalUnit, Kitchen, MotionNode, MotionRateTable, ObjectNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("unit ends without a motion line")]
    UnitWithoutMotion { line: usize },
    #[error("unit has more than one motion line")]
    MultipleMotions { line: usize },
    #[error("unit has no input objects")]
    UnitWithoutInputs { line: usize },
    #[error("unit has no output objects")]
    UnitWithoutOutputs { line: usize },
    #[error("object line without a name")]
    ObjectWithoutName { line: usize },
    #[error("state line outside an object block")]
    StateBeforeObject { line: usize },
    #[error("unit starting here is never terminated by `//`")]
    DanglingUnit { line: usize },
    #[error("motion line in a kitchen file")]
    MotionInKitchenFile { line: usize },
    #[error("expected `label<TAB>rate`")]
    MalformedRateLine { line: usize },
    #[error("rate {rate} is outside [0, 1]")]
    RateOutOfRange { line: usize, rate: f64 },
    #[error("goal spec has an empty name")]
    EmptyGoalName,
    #[error("goal spec `{0}` has more than three `;`-separated fields")]
    MalformedGoal(String),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        use ParseError::*;
        match *self {
            MalformedLine { line, .. }
            | UnitWithoutMotion { line }
            | MultipleMotions { line }
            | UnitWithoutInputs { line }
            | UnitWithoutOutputs { line }
            | ObjectWithoutName { line }
            | StateBeforeObject { line }
            | DanglingUnit { line }
            | MotionInKitchenFile { line }
            | MalformedRateLine { line }
            | RateOutOfRange { line, .. } => Some(line),
            EmptyGoalName | MalformedGoal(_) => None,
        }
    }
}

/// Error from reading one of the input files, carrying the path.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{}: {source}", source.line().unwrap_or(0))]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
}

#[derive(Debug, Clone, Default)]
pub struct SubgraphDocument {
    pub units: Vec<FunctionalUnit>,
    pub source_path: String,
}

enum Record<'a> {
    Object {
        name: &'a str,
        tag: &'a str,
    },
    State {
        label: &'a str,
        ingredients: Option<Vec<&'a str>>,
    },
    Motion {
        label: &'a str,
        start: Option<&'a str>,
        end: Option<&'a str>,
    },
    EndOfUnit,
}

/// Yields `(line_number, record)` for every meaningful line.
fn records(text: &str) -> impl Iterator<Item = Result<(usize, Record<'_>), ParseError>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(parse_record(line, raw))
    })
}

fn parse_record(line: usize, raw: &str) -> Result<(usize, Record<'_>), ParseError> {
    if raw.trim() == "//" {
        return Ok((line, Record::EndOfUnit));
    }
    let fields: Vec<&str> = raw.split('\t').collect();
    let field = |i: usize| fields.get(i).copied().unwrap_or("");
    let record = match fields[0].trim() {
        "O" => {
            if field(1).trim().is_empty() {
                return Err(ParseError::ObjectWithoutName { line });
            }
            Record::Object {
                name: field(1),
                tag: field(2),
            }
        }
        "S" => {
            let ingredients = match fields.get(2).map(|f| f.trim()) {
                None | Some("") => None,
                Some(braced) => {
                    let inner = braced
                        .strip_prefix('{')
                        .and_then(|b| b.strip_suffix('}'))
                        .ok_or_else(|| ParseError::MalformedLine {
                            line,
                            reason: format!("ingredient list `{braced}` is not enclosed in braces"),
                        })?;
                    Some(inner.split(',').collect())
                }
            };
            Record::State {
                label: field(1),
                ingredients,
            }
        }
        "M" => {
            if field(1).trim().is_empty() {
                return Err(ParseError::MalformedLine {
                    line,
                    reason: "motion line without a label".into(),
                });
            }
            Record::Motion {
                label: field(1),
                start: fields.get(2).copied(),
                end: fields.get(3).copied(),
            }
        }
        other => {
            return Err(ParseError::MalformedLine {
                line,
                reason: format!("unknown record tag `{other}`"),
            })
        }
    };
    Ok((line, record))
}

fn apply_state(obj: &mut ObjectNode, label: &str, ingredients: Option<Vec<&str>>) {
    match ingredients {
        Some(ings) => {
            if !label.trim().is_empty() {
                obj.add_state(label);
            }
            for i in ings {
                obj.add_ingredient(i);
            }
        }
        None => obj.add_state(label),
    }
}

fn new_object(name: &str, tag: &str) -> ObjectNode {
    // name non-emptiness was checked while lexing
    ObjectNode::new(name)
        .expect("object name checked by lexer")
        .with_motion_tag(tag)
}

#[derive(Default)]
struct PendingUnit {
    start_line: Option<usize>,
    inputs: Vec<ObjectNode>,
    motion: Option<MotionNode>,
    outputs: Vec<ObjectNode>,
    // whether S lines may attach to the last object pushed
    object_open: bool,
}

impl PendingUnit {
    fn is_empty(&self) -> bool {
        self.start_line.is_none()
    }

    fn current(&mut self) -> Option<&mut ObjectNode> {
        if !self.object_open {
            return None;
        }
        if self.motion.is_some() {
            self.outputs.last_mut()
        } else {
            self.inputs.last_mut()
        }
    }
}

pub fn parse_subgraph(text: &str) -> Result<SubgraphDocument, ParseError> {
    let mut units = Vec::new();
    let mut pending = PendingUnit::default();

    for rec in records(text) {
        let (line, rec) = rec?;
        pending.start_line.get_or_insert(line);
        match rec {
            Record::Object { name, tag } => {
                let obj = new_object(name, tag);
                if pending.motion.is_some() {
                    pending.outputs.push(obj);
                } else {
                    pending.inputs.push(obj);
                }
                pending.object_open = true;
            }
            Record::State { label, ingredients } => {
                let obj = pending
                    .current()
                    .ok_or(ParseError::StateBeforeObject { line })?;
                apply_state(obj, label, ingredients);
            }
            Record::Motion { label, start, end } => {
                if pending.motion.is_some() {
                    return Err(ParseError::MultipleMotions { line });
                }
                let motion = MotionNode::new(label)
                    .expect("motion label checked by lexer")
                    .with_times(start, end);
                pending.motion = Some(motion);
                pending.object_open = false;
            }
            Record::EndOfUnit => {
                let done = std::mem::take(&mut pending);
                let motion = done.motion.ok_or(ParseError::UnitWithoutMotion { line })?;
                if done.inputs.is_empty() {
                    return Err(ParseError::UnitWithoutInputs { line });
                }
                if done.outputs.is_empty() {
                    return Err(ParseError::UnitWithoutOutputs { line });
                }
                let mut unit = FunctionalUnit::new(done.inputs, motion, done.outputs)
                    .expect("inputs and outputs checked above");
                unit.source_index = units.len();
                units.push(unit);
            }
        }
    }
    if !pending.is_empty() {
        return Err(ParseError::DanglingUnit {
            line: pending.start_line.unwrap_or(1),
        });
    }
    Ok(SubgraphDocument {
        units,
        source_path: String::new(),
    })
}

/// Parses a kitchen file: object blocks only. `//` separators are tolerated
/// and ignored.
pub fn parse_kitchen(text: &str) -> Result<Kitchen, ParseError> {
    let mut items: Vec<ObjectNode> = Vec::new();
    let mut open = false;
    for rec in records(text) {
        let (line, rec) = rec?;
        match rec {
            Record::Object { name, tag } => {
                items.push(new_object(name, tag));
                open = true;
            }
            Record::State { label, ingredients } => {
                let obj = items
                    .last_mut()
                    .filter(|_| open)
                    .ok_or(ParseError::StateBeforeObject { line })?;
                apply_state(obj, label, ingredients);
            }
            Record::Motion { .. } => return Err(ParseError::MotionInKitchenFile { line }),
            Record::EndOfUnit => open = false,
        }
    }
    Ok(items.into_iter().collect())
}

/// Parses `label<TAB>rate` lines. Unlisted motions get a rate of 1.0.
pub fn parse_rates(text: &str) -> Result<MotionRateTable, ParseError> {
    let mut table = MotionRateTable::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let [label, rate] = fields[..] else {
            return Err(ParseError::MalformedRateLine { line });
        };
        if label.trim().is_empty() {
            return Err(ParseError::MalformedRateLine { line });
        }
        let rate: f64 = rate
            .trim()
            .parse()
            .map_err(|_| ParseError::MalformedRateLine { line })?;
        table
            .set(label, rate)
            .map_err(|_| ParseError::RateOutOfRange { line, rate })?;
    }
    Ok(table)
}

/// Parses `name[;state,state,...[;ingredient,ingredient,...]]`.
pub fn parse_goal(spec: &str) -> Result<ObjectNode, ParseError> {
    let fields: Vec<&str> = spec.split(';').collect();
    if fields.len() > 3 {
        return Err(ParseError::MalformedGoal(spec.to_string()));
    }
    let list = |i: usize| -> Vec<&str> {
        fields
            .get(i)
            .map(|f| f.split(',').filter(|s| !s.trim().is_empty()).collect())
            .unwrap_or_default()
    };
    let node = ObjectNode::new(fields[0]).map_err(|_| ParseError::EmptyGoalName)?;
    Ok(node.with_states(list(1)).with_ingredients(list(2)))
}

fn write_object(out: &mut String, o: &ObjectNode) {
    out.push_str("O\t");
    out.push_str(o.name());
    if !o.motion_tag().is_empty() {
        out.push('\t');
        out.push_str(o.motion_tag());
    }
    out.push('\n');

    let ingredients = if o.ingredients().is_empty() {
        None
    } else {
        let list: Vec<&str> = o.ingredients().iter().map(String::as_str).collect();
        Some(format!("{{{}}}", list.join(",")))
    };
    let carrier = o.states().iter().find(|s| !s.is_empty());
    for state in o.states() {
        if state.is_empty() {
            out.push_str("S\n");
            continue;
        }
        out.push_str("S\t");
        out.push_str(state);
        if Some(state) == carrier {
            if let Some(ings) = &ingredients {
                out.push('\t');
                out.push_str(ings);
            }
        }
        out.push('\n');
    }
    if carrier.is_none() {
        if let Some(ings) = &ingredients {
            let _ = writeln!(out, "S\t\t{ings}");
        }
    }
}

/// Serializes units in the subgraph grammar. States and ingredients are
/// emitted in sorted order; every record ends with a newline.
pub fn serialize_units(units: &[FunctionalUnit]) -> String {
    let mut out = String::new();
    for unit in units {
        for o in &unit.inputs {
            write_object(&mut out, o);
        }
        out.push_str("M\t");
        out.push_str(unit.motion.label());
        match (&unit.motion.start_time, &unit.motion.end_time) {
            (None, None) => {}
            (Some(s), None) => {
                let _ = write!(out, "\t{s}");
            }
            (s, Some(e)) => {
                let _ = write!(out, "\t{}\t{e}", s.as_deref().unwrap_or(""));
            }
        }
        out.push('\n');
        for o in &unit.outputs {
            write_object(&mut out, o);
        }
        out.push_str("//\n");
    }
    out
}

pub fn serialize_subgraph(doc: &SubgraphDocument) -> String {
    serialize_units(&doc.units)
}

pub fn serialize_kitchen(kitchen: &Kitchen) -> String {
    let mut out = String::new();
    for o in kitchen.iter() {
        write_object(&mut out, o);
    }
    out
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn with_path<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, LoadError> {
    r.map_err(|source| LoadError::Parse {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_subgraph(path: &Path) -> Result<SubgraphDocument, LoadError> {
    let mut doc = with_path(path, parse_subgraph(&read(path)?))?;
    doc.source_path = path.display().to_string();
    Ok(doc)
}

pub fn load_kitchen(path: &Path) -> Result<Kitchen, LoadError> {
    with_path(path, parse_kitchen(&read(path)?))
}

pub fn load_rates(path: &Path) -> Result<MotionRateTable, LoadError> {
    with_path(path, parse_rates(&read(path)?))
}
