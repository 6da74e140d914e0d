//! Offline step: optimal exit costs and witnesses for every machine.
//!
//! For a machine `M`, the augmented machine adds one sink `E_x` per input.
//! A defined transition `q --x--> v` costs the child exit cost of `q` for
//! `x` plus its own cost; an undefined one leads to `E_x` at the child exit
//! cost alone. A shortest path from the start of `M` to `E_x` is an optimal
//! way to leave `M` with `x`. Children are solved before their parents.

use thiserror::Error;

use crate::cost::Cost;
use crate::dijkstra::{dijkstra, Graph};
use crate::hierarchy::{validate, Hierarchy, InputId, MachineId, MealyMachine, NodeId, ValidationReport};
use crate::par::Parallelism;

/// One step inside a single machine: apply `input` at local `state`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub state: u32,
    pub input: InputId,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExitCostError {
    #[error("hierarchy is invalid:\n{0}")]
    Invalid(ValidationReport),
    #[error("no child exit cost for state #{state} on input #{input}")]
    MissingChildCost { state: u32, input: u32 },
}

/// A machine plus one artificial exit vertex per input. Vertices
/// `0..states` are the machine's states, `states + x` is `E_x`.
#[derive(Clone, Debug)]
pub struct AugmentedMachine {
    states: usize,
    inputs: usize,
    start: u32,
    /// Target vertex per (state, input).
    target: Vec<u32>,
    /// Edge weight per (state, input); infinite when the child cannot exit.
    weight: Vec<f64>,
}

/// Builds the augmented machine. `child_cost(q, x)` must give the exit cost
/// of node `q` for input `x` (zero for unrefined states).
pub fn augment(
    m: &MealyMachine,
    mut child_cost: impl FnMut(u32, InputId) -> Option<Cost>,
) -> Result<AugmentedMachine, ExitCostError> {
    let (states, inputs) = (m.state_count(), m.input_count());
    let mut target = Vec::with_capacity(states * inputs);
    let mut weight = Vec::with_capacity(states * inputs);
    for q in 0..states as u32 {
        for x in 0..inputs as u32 {
            let c = child_cost(q, InputId(x)).ok_or(ExitCostError::MissingChildCost { state: q, input: x })?;
            match m.transition(q, InputId(x)) {
                Some(t) => {
                    target.push(t.target);
                    weight.push((c + t.cost).value());
                }
                None => {
                    target.push((states + x as usize) as u32);
                    weight.push(c.value());
                }
            }
        }
    }
    Ok(AugmentedMachine { states, inputs, start: m.start(), target, weight })
}

impl AugmentedMachine {
    pub fn exit_vertex(&self, x: InputId) -> usize {
        self.states + x.index()
    }

    /// Successor vertex of `q` under `x`.
    pub fn delta_hat(&self, q: u32, x: InputId) -> usize {
        self.target[q as usize * self.inputs + x.index()] as usize
    }

    pub fn gamma_hat(&self, q: u32, x: InputId) -> Cost {
        Cost::from_valid(self.weight[q as usize * self.inputs + x.index()])
    }

    pub fn start(&self) -> u32 {
        self.start
    }
}

impl Graph for AugmentedMachine {
    type Edge = Step;

    fn vertex_count(&self) -> usize {
        self.states + self.inputs
    }

    fn for_each_edge<F: FnMut(usize, f64, Step)>(&self, v: usize, mut f: F) {
        if v >= self.states {
            return;
        }
        let row = v * self.inputs;
        for x in 0..self.inputs {
            let w = self.weight[row + x];
            if w.is_finite() {
                f(self.target[row + x] as usize, w, Step { state: v as u32, input: InputId(x as u32) });
            }
        }
    }
}

/// Optimal exit cost and witness for every `(machine, input)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitCostTable {
    inputs: usize,
    costs: Vec<Cost>,
    /// Witness of entry `i` is `steps[offsets[i]..offsets[i + 1]]`.
    offsets: Vec<u32>,
    steps: Vec<Step>,
}

impl ExitCostTable {
    /// Assembles a table from entries in machine-major, input-minor order.
    pub fn from_entries(inputs: usize, entries: impl IntoIterator<Item = (Cost, Vec<Step>)>) -> ExitCostTable {
        let mut costs = Vec::new();
        let mut offsets = vec![0u32];
        let mut steps = Vec::new();
        for (c, w) in entries {
            costs.push(c);
            steps.extend(w);
            offsets.push(steps.len() as u32);
        }
        ExitCostTable { inputs, costs, offsets, steps }
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn machine_count(&self) -> usize {
        self.costs.len().checked_div(self.inputs).unwrap_or(0)
    }

    /// Optimal exit cost of machine `m` with input `x`.
    #[inline]
    pub fn cost(&self, m: MachineId, x: InputId) -> Cost {
        self.costs[m.index() * self.inputs + x.index()]
    }

    /// Witness path inside `m` from its start state; the last step applies
    /// `x` where the augmented machine leaves to `E_x`. Empty when the
    /// cost is infinite.
    pub fn witness(&self, m: MachineId, x: InputId) -> &[Step] {
        let i = m.index() * self.inputs + x.index();
        &self.steps[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Exit cost of a node: zero for a state, else its child's entry.
    #[inline]
    pub fn node_cost(&self, h: &Hierarchy, node: NodeId, x: InputId) -> Cost {
        match h.child(node) {
            Some(c) => self.cost(c, x),
            None => Cost::ZERO,
        }
    }

    /// Whether the table has the shape of `h`.
    pub fn fits(&self, h: &Hierarchy) -> bool {
        self.inputs == h.input_count() && self.costs.len() == h.machine_count() * h.input_count()
    }
}

/// Exit cost `c_x^q` of node `q`.
pub fn exit_cost(t: &ExitCostTable, h: &Hierarchy, q: NodeId, x: InputId) -> Cost {
    t.node_cost(h, q, x)
}

pub fn compute_exit_tables(h: &Hierarchy) -> Result<ExitCostTable, ExitCostError> {
    compute_exit_tables_with(h, Parallelism::default())
}

struct MachineExits {
    costs: Vec<Cost>,
    witnesses: Vec<Vec<Step>>,
}

/// Solves machines level by level from the deepest level up; machines on
/// the same level are independent and may run in parallel.
pub fn compute_exit_tables_with(h: &Hierarchy, par: Parallelism) -> Result<ExitCostTable, ExitCostError> {
    if !h.is_validated() {
        let report = validate(h);
        if !report.is_valid() {
            return Err(ExitCostError::Invalid(report));
        }
    }
    let inputs = h.input_count();
    let mut costs = vec![Cost::INFINITY; h.machine_count() * inputs];
    let mut witnesses: Vec<Vec<Vec<Step>>> = vec![Vec::new(); h.machine_count()];
    for level in h.machines_by_level().iter().rev() {
        let solved = par.map(level, |&m| solve_machine(h, m, &costs));
        for (&m, exits) in level.iter().zip(solved) {
            costs[m.index() * inputs..(m.index() + 1) * inputs].copy_from_slice(&exits.costs);
            witnesses[m.index()] = exits.witnesses;
        }
    }
    Ok(ExitCostTable::from_entries(
        inputs,
        witnesses.into_iter().enumerate().flat_map(|(m, ws)| {
            let costs = &costs;
            ws.into_iter().enumerate().map(move |(x, w)| (costs[m * inputs + x], w))
        }),
    ))
}

fn solve_machine(h: &Hierarchy, m: MachineId, costs: &[Cost]) -> MachineExits {
    let inputs = h.input_count();
    let aug = augment(h.machine(m), |q, x| match h.child(NodeId::new(m, q)) {
        Some(c) => Some(costs[c.index() * inputs + x.index()]),
        None => Some(Cost::ZERO),
    })
    .expect("every child cost is available");
    let targets: Vec<usize> = h.input_ids().map(|x| aug.exit_vertex(x)).collect();
    let paths = dijkstra(&aug, aug.start() as usize, &targets);
    let mut out = MachineExits { costs: Vec::with_capacity(inputs), witnesses: Vec::with_capacity(inputs) };
    for &t in &targets {
        match paths.route(t) {
            Some(r) => {
                out.costs.push(r.cost);
                out.witnesses.push(r.edges);
            }
            None => {
                out.costs.push(Cost::INFINITY);
                out.witnesses.push(Vec::new());
            }
        }
    }
    out
}
