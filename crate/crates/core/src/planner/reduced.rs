//! The reduced hierarchy of one query: only the machines on the two root
//! paths keep their refinements. Every other refined node becomes a state
//! whose transitions carry its optimal exit cost.

use crate::cost::Cost;
use crate::exit_costs::ExitCostTable;
use crate::hierarchy::{Hierarchy, InputId, MachineId, NodeId};

use super::decomposition::PathDecomposition;

/// Lazy view: nothing is copied, reduced costs are computed on demand.
#[derive(Clone, Debug)]
pub struct ReducedHiMM<'a> {
    h: &'a Hierarchy,
    table: &'a ExitCostTable,
    paths: PathDecomposition,
    /// Machines kept in the reduced hierarchy, sorted.
    kept: Vec<MachineId>,
}

impl<'a> ReducedHiMM<'a> {
    pub fn new(h: &'a Hierarchy, table: &'a ExitCostTable, paths: PathDecomposition) -> ReducedHiMM<'a> {
        let mut kept: Vec<MachineId> = paths.up.iter().chain(paths.down.iter()).map(|l| l.machine).collect();
        kept.sort_unstable();
        kept.dedup();
        ReducedHiMM { h, table, paths, kept }
    }

    pub fn hierarchy(&self) -> &'a Hierarchy {
        self.h
    }

    pub fn table(&self) -> &'a ExitCostTable {
        self.table
    }

    pub fn paths(&self) -> &PathDecomposition {
        &self.paths
    }

    pub fn machines(&self) -> &[MachineId] {
        &self.kept
    }

    pub fn contains_machine(&self, m: MachineId) -> bool {
        self.kept.binary_search(&m).is_ok()
    }

    /// Whether `node` keeps its refinement, i.e. refines into a kept machine.
    pub fn is_kept(&self, node: NodeId) -> bool {
        self.h.child(node).is_some_and(|c| self.contains_machine(c))
    }

    /// Reduced cost of applying `x` at `q`, for `q` in a kept machine.
    ///
    /// | `δ(q,x)`  | `q` kept | otherwise      |
    /// |-----------|----------|----------------|
    /// | defined   | `γ`      | `c_x^q + γ`    |
    /// | undefined | `0`      | `c_x^q`        |
    pub fn gamma_bar(&self, q: NodeId, x: InputId) -> Cost {
        let exit = if self.is_kept(q) { Cost::ZERO } else { self.table.node_cost(self.h, q, x) };
        match self.h.transition(q, x) {
            Some(t) => exit + t.cost,
            None => exit,
        }
    }

    /// The reduced state standing for `leaf`: its nearest ancestor node
    /// (or itself) that lies in a kept machine.
    pub fn reduce_node(&self, leaf: NodeId) -> NodeId {
        let mut current = leaf;
        while !self.contains_machine(current.machine) {
            current = self.h.parent(current.machine).expect("the root machine is kept");
        }
        current
    }

    /// Follows start states down through kept refinements only.
    pub fn enter(&self, node: NodeId) -> NodeId {
        let mut current = node;
        while self.is_kept(current) {
            let c = self.h.child(current).expect("kept nodes are refined");
            current = NodeId::new(c, self.h.machine(c).start());
        }
        current
    }

    /// Reduced step: climbs like the hierarchical step, but the cost adds
    /// the reduced cost of every level passed on the way up.
    pub fn step(&self, q: NodeId, x: InputId) -> Option<(NodeId, Cost)> {
        let mut cost = Cost::ZERO;
        let mut current = q;
        loop {
            cost = cost + self.gamma_bar(current, x);
            if let Some(t) = self.h.transition(current, x) {
                return Some((self.enter(NodeId::new(current.machine, t.target)), cost));
            }
            current = self.h.parent(current.machine)?;
        }
    }

    /// Restriction of the trajectory that `plan` induces from `start`:
    /// every step is replaced by its reduced state, and steps that do not
    /// change the reduced state are dropped.
    pub fn reduce_trajectory(&self, start: NodeId, plan: &[InputId]) -> Vec<(NodeId, InputId)> {
        let mut out = Vec::new();
        let mut current = start;
        for &x in plan {
            let here = self.reduce_node(current);
            match self.h.step(current, x) {
                Some((next, _)) => {
                    if self.reduce_node(next) != here {
                        out.push((here, x));
                    }
                    current = next;
                }
                None => {
                    out.push((here, x));
                    break;
                }
            }
        }
        out
    }

    /// Cumulative reduced cost and end state of a reduced trajectory, or
    /// `None` if it is not connected from `start` or stops.
    pub fn reduced_cost(&self, start: NodeId, z: &[(NodeId, InputId)]) -> Option<(Cost, NodeId)> {
        let mut current = start;
        let mut total = Cost::ZERO;
        for &(q, x) in z {
            if q != current {
                return None;
            }
            let (next, c) = self.step(q, x)?;
            total = total + c;
            current = next;
        }
        Some((total, current))
    }
}
