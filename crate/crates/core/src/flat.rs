//! The equivalent flat machine over all states, and the plain Dijkstra
//! baseline that every hierarchical result is checked against.

use crate::cost::Cost;
use crate::dijkstra::{dijkstra, Graph};
use crate::hierarchy::{Hierarchy, InputId, MachineId, NodeId};
use crate::par::Parallelism;

const NONE: u32 = u32::MAX;
const CHUNK: usize = 4096;

/// Dense flat machine: one vertex per state of the hierarchy, transitions
/// materialized from the hierarchical step function.
#[derive(Clone, Debug)]
pub struct FlatMachine {
    inputs: usize,
    leaves: Vec<NodeId>,
    /// Global node index to flat index, `NONE` for refined nodes.
    index: Vec<u32>,
    target: Vec<u32>,
    cost: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatPlan {
    pub feasible: bool,
    pub cost: Cost,
    pub plan: Vec<InputId>,
}

pub fn flatten(h: &Hierarchy) -> FlatMachine {
    flatten_with(h, Parallelism::default())
}

pub fn flatten_with(h: &Hierarchy, par: Parallelism) -> FlatMachine {
    let inputs = h.input_count();
    let leaves: Vec<NodeId> = h.leaves().collect();
    let mut index = vec![NONE; h.node_count()];
    for (i, &leaf) in leaves.iter().enumerate() {
        index[h.node_index(leaf)] = i as u32;
    }
    let chunks = par.map_range(leaves.len().div_ceil(CHUNK), |c| {
        let part = &leaves[c * CHUNK..((c + 1) * CHUNK).min(leaves.len())];
        let mut target = Vec::with_capacity(part.len() * inputs);
        let mut cost = Vec::with_capacity(part.len() * inputs);
        for &leaf in part {
            for x in h.input_ids() {
                match h.step(leaf, x) {
                    Some((next, c)) => {
                        target.push(index[h.node_index(next)]);
                        cost.push(c.value());
                    }
                    None => {
                        target.push(NONE);
                        cost.push(f64::INFINITY);
                    }
                }
            }
        }
        (target, cost)
    });
    let mut target = Vec::with_capacity(leaves.len() * inputs);
    let mut cost = Vec::with_capacity(leaves.len() * inputs);
    for (t, c) in chunks {
        target.extend(t);
        cost.extend(c);
    }
    FlatMachine { inputs, leaves, index, target, cost }
}

impl FlatMachine {
    pub fn state_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn leaf(&self, i: usize) -> NodeId {
        self.leaves[i]
    }

    pub fn flat_index(&self, h: &Hierarchy, node: NodeId) -> Option<usize> {
        let i = self.index[h.node_index(node)];
        (i != NONE).then_some(i as usize)
    }

    /// Flat transition from the state with flat index `i`.
    pub fn transition(&self, i: usize, x: InputId) -> Option<(usize, Cost)> {
        let k = i * self.inputs + x.index();
        let t = self.target[k];
        (t != NONE).then(|| (t as usize, Cost::from_valid(self.cost[k])))
    }

    /// Same as [`Hierarchy::step`], answered from the flat tables.
    pub fn step(&self, h: &Hierarchy, node: NodeId, x: InputId) -> Option<(NodeId, Cost)> {
        let i = self.flat_index(h, node)?;
        self.transition(i, x).map(|(t, c)| (self.leaves[t], c))
    }
}

impl Graph for FlatMachine {
    type Edge = InputId;

    fn vertex_count(&self) -> usize {
        self.leaves.len()
    }

    fn for_each_edge<F: FnMut(usize, f64, InputId)>(&self, v: usize, mut f: F) {
        let row = v * self.inputs;
        for x in 0..self.inputs {
            let t = self.target[row + x];
            if t != NONE {
                f(t as usize, self.cost[row + x], InputId(x as u32));
            }
        }
    }
}

/// Shortest plan between two states of the flat machine.
pub fn flat_plan(fm: &FlatMachine, h: &Hierarchy, s_init: NodeId, s_goal: NodeId) -> FlatPlan {
    let (Some(from), Some(to)) = (fm.flat_index(h, s_init), fm.flat_index(h, s_goal)) else {
        return FlatPlan { feasible: false, cost: Cost::INFINITY, plan: Vec::new() };
    };
    match dijkstra(fm, from, &[to]).route(to) {
        Some(route) => FlatPlan { feasible: true, cost: route.cost, plan: route.edges },
        None => FlatPlan { feasible: false, cost: Cost::INFINITY, plan: Vec::new() },
    }
}

/// Flat machine with only the steps that stay inside one subtree.
struct Subtree<'a> {
    fm: &'a FlatMachine,
    h: &'a Hierarchy,
    root: MachineId,
}

impl Subtree<'_> {
    /// Whether applying `x` at `s` leaves the subtree: the climb from `s`
    /// passes `root` without finding a transition. A self-loop defined
    /// above `root` still counts as leaving.
    fn leaves_with(&self, s: NodeId, x: InputId) -> bool {
        let mut current = s;
        loop {
            if self.h.transition(current, x).is_some() {
                return false;
            }
            if current.machine == self.root {
                return true;
            }
            current = self.h.parent(current.machine).expect("state lies inside the subtree");
        }
    }
}

impl Graph for Subtree<'_> {
    type Edge = InputId;

    fn vertex_count(&self) -> usize {
        self.fm.vertex_count()
    }

    fn for_each_edge<F: FnMut(usize, f64, InputId)>(&self, v: usize, mut f: F) {
        let s = self.fm.leaf(v);
        for x in self.h.input_ids() {
            if !self.leaves_with(s, x) {
                if let Some((t, c)) = self.fm.transition(v, x) {
                    f(t, c.value(), x);
                }
            }
        }
    }
}

/// Cheapest way to leave node `q`'s subtree with `x`, found by a flat
/// search restricted to the subtree. The final (leaving) step is not
/// counted. Zero for states; infinite when no such exit exists.
pub fn brute_force_exit_cost(h: &Hierarchy, fm: &FlatMachine, q: NodeId, x: InputId) -> Cost {
    match h.child(q) {
        Some(m) => brute_force_machine_exit(h, fm, m, x),
        None => Cost::ZERO,
    }
}

/// [`brute_force_exit_cost`] for a whole machine, including the root.
pub fn brute_force_machine_exit(h: &Hierarchy, fm: &FlatMachine, m: MachineId, x: InputId) -> Cost {
    let sub = Subtree { fm, h, root: m };
    let start = fm.flat_index(h, h.start_leaf(m)).expect("start leaf is a state");
    let paths = dijkstra(&sub, start, &[]);
    (0..fm.state_count())
        .filter(|&v| paths.reached(v) && sub.leaves_with(fm.leaf(v), x))
        .map(|v| paths.cost(v))
        .min()
        .unwrap_or(Cost::INFINITY)
}
