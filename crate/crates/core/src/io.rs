//! JSON documents for hierarchies and exit-cost caches, and plan files.
//!
//! Serialization is canonical (machines, transitions and refinements in
//! index order), so equal hierarchies produce byte-identical documents and
//! the SHA-256 of a document identifies its hierarchy.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cost::Cost;
use crate::exit_costs::{ExitCostTable, Step};
use crate::hierarchy::{Hierarchy, HierarchyError, InputId, MachineId, MealyMachine, Transition, ValidationReport};

pub const HIMM_VERSION: &str = "himm/1";
pub const CACHE_VERSION: &str = "himm-exits/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{location}: {message}")]
    Semantic { location: String, message: String },
    #[error("hierarchy is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("stale cache: it was computed for hierarchy {found}, but this hierarchy is {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> IoError {
        if e.is_io() {
            return IoError::Io(e.into());
        }
        IoError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn semantic(location: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Semantic { location: location.into(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HimmDocument {
    pub version: String,
    pub inputs: Vec<String>,
    pub root: String,
    pub machines: Vec<MachineDoc>,
    #[serde(default)]
    pub refinement: Vec<RefinementDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDoc {
    pub id: String,
    pub states: Vec<String>,
    pub start: String,
    #[serde(default)]
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub input: String,
    pub to: String,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementDoc {
    pub machine: String,
    pub state: String,
    pub child: String,
}

/// Canonical document for `h`.
pub fn to_document(h: &Hierarchy) -> HimmDocument {
    let inputs = h.inputs().to_vec();
    let machines = h
        .machines()
        .iter()
        .map(|m| {
            let mut transitions = Vec::new();
            for (s, name) in m.states().iter().enumerate() {
                for (x, input) in inputs.iter().enumerate() {
                    if let Some(t) = m.transition(s as u32, InputId(x as u32)) {
                        transitions.push(TransitionDoc {
                            from: name.clone(),
                            input: input.clone(),
                            to: m.state_name(t.target).to_owned(),
                            cost: t.cost,
                        });
                    }
                }
            }
            MachineDoc {
                id: m.id().to_owned(),
                states: m.states().to_vec(),
                start: m.state_name(m.start()).to_owned(),
                transitions,
            }
        })
        .collect();
    let refinement = h
        .refinements()
        .into_iter()
        .map(|(m, s, c)| RefinementDoc {
            machine: h.machine(m).id().to_owned(),
            state: h.machine(m).state_name(s).to_owned(),
            child: h.machine(c).id().to_owned(),
        })
        .collect();
    HimmDocument {
        version: HIMM_VERSION.to_owned(),
        inputs,
        root: h.machine(h.root()).id().to_owned(),
        machines,
        refinement,
    }
}

/// Streams the canonical serialization of `h` into `w`.
pub fn write_himm<W: Write>(h: &Hierarchy, w: W) -> Result<(), IoError> {
    let mut w = std::io::BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, &to_document(h))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn serialize_himm(h: &Hierarchy) -> String {
    let mut out = Vec::new();
    write_himm(h, &mut out).expect("writing to memory cannot fail");
    String::from_utf8(out).expect("JSON is UTF-8")
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Hex SHA-256 of the canonical serialization.
pub fn digest(h: &Hierarchy) -> String {
    let mut w = HashWriter(Sha256::new());
    write_himm(h, &mut w).expect("hashing cannot fail");
    hex::encode(w.0.finalize())
}

pub fn parse_himm(text: &str) -> Result<Hierarchy, IoError> {
    from_document(serde_json::from_str(text)?)
}

pub fn read_himm<R: std::io::Read>(r: R) -> Result<Hierarchy, IoError> {
    from_document(serde_json::from_reader(std::io::BufReader::new(r))?)
}

type StateIndex = Arc<HashMap<String, u32>>;

type SharedTable = Arc<[Option<Transition>]>;

/// Builds and validates the hierarchy a document describes. Identical
/// state lists and transition tables are shared between machines.
pub fn from_document(doc: HimmDocument) -> Result<Hierarchy, IoError> {
    if doc.version != HIMM_VERSION {
        return Err(semantic("version", format!("unsupported version `{}`, expected `{HIMM_VERSION}`", doc.version)));
    }
    let mut input_index = HashMap::new();
    for (i, x) in doc.inputs.iter().enumerate() {
        if input_index.insert(x.as_str(), i as u32).is_some() {
            return Err(semantic(format!("inputs[{i}]"), format!("duplicate input `{x}`")));
        }
    }
    let mut machine_index: HashMap<&str, u32> = HashMap::new();
    for (i, m) in doc.machines.iter().enumerate() {
        if machine_index.insert(m.id.as_str(), i as u32).is_some() {
            return Err(semantic(format!("machines[{i}].id"), format!("duplicate machine id `{}`", m.id)));
        }
    }

    let width = doc.inputs.len();
    let mut state_pool: HashMap<Vec<String>, (Arc<[String]>, StateIndex)> = HashMap::new();
    let mut table_pool: HashMap<Vec<(u32, u64)>, SharedTable> = HashMap::new();
    let mut machines = Vec::with_capacity(doc.machines.len());
    let mut state_indices = Vec::with_capacity(doc.machines.len());
    for (i, m) in doc.machines.iter().enumerate() {
        let at = |field: &str| format!("machines[{i}].{field}");
        let (states, index) = match state_pool.get(&m.states) {
            Some(entry) => entry.clone(),
            None => {
                let mut index = HashMap::with_capacity(m.states.len());
                for (s, name) in m.states.iter().enumerate() {
                    if index.insert(name.clone(), s as u32).is_some() {
                        return Err(semantic(
                            at(&format!("states[{s}]")),
                            format!("duplicate state `{name}` in machine `{}`", m.id),
                        ));
                    }
                }
                let entry: (Arc<[String]>, StateIndex) = (m.states.clone().into(), Arc::new(index));
                state_pool.insert(m.states.clone(), entry.clone());
                entry
            }
        };
        let lookup = |field: String, name: &str| {
            index.get(name).copied().ok_or_else(|| semantic(field, format!("machine `{}` has no state `{name}`", m.id)))
        };
        let start = lookup(at("start"), &m.start)?;
        let mut table = vec![None; states.len() * width];
        for (k, t) in m.transitions.iter().enumerate() {
            let from = lookup(at(&format!("transitions[{k}].from")), &t.from)?;
            let to = lookup(at(&format!("transitions[{k}].to")), &t.to)?;
            let x = *input_index.get(t.input.as_str()).ok_or_else(|| {
                semantic(at(&format!("transitions[{k}].input")), format!("unknown input `{}`", t.input))
            })?;
            let slot = &mut table[from as usize * width + x as usize];
            if slot.is_some() {
                return Err(semantic(
                    at(&format!("transitions[{k}]")),
                    format!("second transition from `{}` on `{}`", t.from, t.input),
                ));
            }
            *slot = Some(Transition { target: to, cost: t.cost });
        }
        let key: Vec<(u32, u64)> =
            table.iter().map(|t| t.map_or((0, 0), |t| (t.target + 1, t.cost.to_bits()))).collect();
        let table = table_pool.entry(key).or_insert_with(|| table.into()).clone();
        machines.push(MealyMachine::from_shared(m.id.clone(), states, start, width, table));
        state_indices.push(index);
    }

    let machine = |field: String, id: &str| {
        machine_index.get(id).copied().map(MachineId).ok_or_else(|| semantic(field, format!("unknown machine `{id}`")))
    };
    let root = machine("root".into(), &doc.root)?;
    let mut refinements = Vec::with_capacity(doc.refinement.len());
    let mut refined = std::collections::HashSet::new();
    for (k, r) in doc.refinement.iter().enumerate() {
        let at = |field: &str| format!("refinement[{k}].{field}");
        let m = machine(at("machine"), &r.machine)?;
        let child = machine(at("child"), &r.child)?;
        let s = state_indices[m.index()]
            .get(&r.state)
            .copied()
            .ok_or_else(|| semantic(at("state"), format!("machine `{}` has no state `{}`", r.machine, r.state)))?;
        if !refined.insert((m, s)) {
            return Err(semantic(
                format!("refinement[{k}]"),
                format!("state `{}` of `{}` refined twice", r.state, r.machine),
            ));
        }
        refinements.push((m, s, child));
    }
    Hierarchy::new(doc.inputs, machines, root, &refinements).map_err(|e| match e {
        HierarchyError::Invalid(report) => IoError::Invalid(report),
        other => semantic("document", other.to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitCacheDocument {
    pub version: String,
    /// Digest of the hierarchy the cache was computed for.
    pub digest: String,
    pub machines: Vec<CacheMachineDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheMachineDoc {
    pub id: String,
    pub exits: Vec<CacheEntryDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheEntryDoc {
    pub input: String,
    /// Shortest round-trip decimal, or `inf`.
    pub cost: String,
    /// `[state, input]` pairs.
    pub witness: Vec<(String, String)>,
}

pub fn cache_document(table: &ExitCostTable, h: &Hierarchy) -> ExitCacheDocument {
    let machines = h
        .machine_ids()
        .map(|m| CacheMachineDoc {
            id: h.machine(m).id().to_owned(),
            exits: h
                .input_ids()
                .map(|x| CacheEntryDoc {
                    input: h.input_name(x).to_owned(),
                    cost: table.cost(m, x).to_string(),
                    witness: table
                        .witness(m, x)
                        .iter()
                        .map(|s| (h.machine(m).state_name(s.state).to_owned(), h.input_name(s.input).to_owned()))
                        .collect(),
                })
                .collect(),
        })
        .collect();
    ExitCacheDocument { version: CACHE_VERSION.to_owned(), digest: digest(h), machines }
}

pub fn write_cache<W: Write>(table: &ExitCostTable, h: &Hierarchy, w: W) -> Result<(), IoError> {
    let mut w = std::io::BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, &cache_document(table, h))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_cache(table: &ExitCostTable, h: &Hierarchy) -> String {
    let mut out = Vec::new();
    write_cache(table, h, &mut out).expect("writing to memory cannot fail");
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn load_cache(text: &str, h: &Hierarchy) -> Result<ExitCostTable, IoError> {
    cache_from_document(serde_json::from_str(text)?, h)
}

pub fn read_cache<R: std::io::Read>(r: R, h: &Hierarchy) -> Result<ExitCostTable, IoError> {
    cache_from_document(serde_json::from_reader(std::io::BufReader::new(r))?, h)
}

fn parse_cost(s: &str) -> Option<Cost> {
    if s == "inf" {
        return Some(Cost::INFINITY);
    }
    let v: f64 = s.parse().ok()?;
    if v.is_finite() {
        Cost::new(v)
    } else {
        None
    }
}

pub fn cache_from_document(doc: ExitCacheDocument, h: &Hierarchy) -> Result<ExitCostTable, IoError> {
    if doc.version != CACHE_VERSION {
        return Err(semantic("version", format!("unsupported version `{}`, expected `{CACHE_VERSION}`", doc.version)));
    }
    let expected = digest(h);
    if doc.digest != expected {
        return Err(IoError::DigestMismatch { expected, found: doc.digest });
    }
    if doc.machines.len() != h.machine_count() {
        return Err(semantic(
            "machines",
            format!("{} machines, hierarchy has {}", doc.machines.len(), h.machine_count()),
        ));
    }
    let mut entries = Vec::with_capacity(h.machine_count() * h.input_count());
    for (i, m) in doc.machines.into_iter().enumerate() {
        let machine = h.machine(MachineId(i as u32));
        if m.id != machine.id() {
            return Err(semantic(
                format!("machines[{i}].id"),
                format!("expected `{}`, found `{}`", machine.id(), m.id),
            ));
        }
        if m.exits.len() != h.input_count() {
            return Err(semantic(format!("machines[{i}].exits"), format!("expected {} entries", h.input_count())));
        }
        for (x, e) in m.exits.into_iter().enumerate() {
            let at = format!("machines[{i}].exits[{x}]");
            if e.input != h.inputs()[x] {
                return Err(semantic(
                    format!("{at}.input"),
                    format!("expected `{}`, found `{}`", h.inputs()[x], e.input),
                ));
            }
            let cost = parse_cost(&e.cost)
                .ok_or_else(|| semantic(format!("{at}.cost"), format!("malformed cost `{}`", e.cost)))?;
            let mut witness = Vec::with_capacity(e.witness.len());
            for (k, (state, input)) in e.witness.iter().enumerate() {
                let state = machine.state_index(state).ok_or_else(|| {
                    semantic(format!("{at}.witness[{k}]"), format!("machine `{}` has no state `{state}`", machine.id()))
                })?;
                let input = h
                    .input_id(input)
                    .ok_or_else(|| semantic(format!("{at}.witness[{k}]"), format!("unknown input `{input}`")))?;
                witness.push(Step { state, input });
            }
            entries.push((cost, witness));
        }
    }
    Ok(ExitCostTable::from_entries(h.input_count(), entries))
}

/// One input name per line.
pub fn format_plan(h: &Hierarchy, plan: &[InputId]) -> String {
    plan.iter().map(|&x| format!("{}\n", h.input_name(x))).collect()
}

/// Reads a plan file; blank lines are ignored.
pub fn parse_plan(h: &Hierarchy, text: &str) -> Result<Vec<InputId>, IoError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            h.input_id(l.trim())
                .ok_or_else(|| semantic(format!("line {}", i + 1), format!("unknown input `{}`", l.trim())))
        })
        .collect()
}
