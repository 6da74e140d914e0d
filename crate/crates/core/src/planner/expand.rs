//! Turning reduced steps back into concrete inputs using the stored exit
//! witnesses.

use crate::exit_costs::{ExitCostTable, Step};
use crate::hierarchy::{Hierarchy, InputId, MachineId, NodeId};

use super::PlanError;

/// Concrete trajectory that leaves node `q` with `x` at optimal cost: `(q, x)`
/// itself for a state, otherwise the expansion of every step of the child's
/// exit witness.
pub fn optimal_expansion(
    h: &Hierarchy,
    table: &ExitCostTable,
    q: NodeId,
    x: InputId,
) -> Result<Vec<(NodeId, InputId)>, PlanError> {
    let mut out = Vec::new();
    expand_into(h, table, q, x, &mut out)?;
    Ok(out)
}

fn expand_into(
    h: &Hierarchy,
    table: &ExitCostTable,
    q: NodeId,
    x: InputId,
    out: &mut Vec<(NodeId, InputId)>,
) -> Result<(), PlanError> {
    match h.child(q) {
        None => out.push((q, x)),
        Some(c) => {
            if table.cost(c, x).is_infinite() {
                return Err(PlanError::NoExit { node: q, input: x });
            }
            for s in table.witness(c, x) {
                expand_into(h, table, NodeId::new(c, s.state), s.input, out)?;
            }
        }
    }
    Ok(())
}

/// Expands a whole reduced trajectory into the induced state trajectory.
pub fn expand_plan(
    h: &Hierarchy,
    table: &ExitCostTable,
    z: &[(NodeId, InputId)],
) -> Result<Vec<(NodeId, InputId)>, PlanError> {
    let mut out = Vec::new();
    for &(q, x) in z {
        expand_into(h, table, q, x, &mut out)?;
    }
    Ok(out)
}

/// Lazy expansion: yields one input at a time, with work bounded by the
/// hierarchy depth per input.
#[derive(Clone, Debug)]
pub struct PlanStream<'a> {
    h: &'a Hierarchy,
    table: &'a ExitCostTable,
    reduced: &'a [(NodeId, InputId)],
    next: usize,
    /// Witnesses being replayed, innermost last.
    stack: Vec<(MachineId, &'a [Step])>,
}

impl<'a> PlanStream<'a> {
    pub fn new(h: &'a Hierarchy, table: &'a ExitCostTable, reduced: &'a [(NodeId, InputId)]) -> Self {
        PlanStream { h, table, reduced, next: 0, stack: Vec::new() }
    }

    /// Descends into `q` when refined; returns the input when `q` is a state.
    fn visit(&mut self, q: NodeId, x: InputId) -> Option<InputId> {
        match self.h.child(q) {
            None => Some(x),
            Some(c) => {
                self.stack.push((c, self.table.witness(c, x)));
                None
            }
        }
    }
}

impl Iterator for PlanStream<'_> {
    type Item = InputId;

    fn next(&mut self) -> Option<InputId> {
        loop {
            if let Some((m, steps)) = self.stack.last_mut() {
                let Some((first, rest)) = steps.split_first() else {
                    self.stack.pop();
                    continue;
                };
                let (m, s) = (*m, *first);
                *steps = rest;
                if let Some(x) = self.visit(NodeId::new(m, s.state), s.input) {
                    return Some(x);
                }
                continue;
            }
            let &(q, x) = self.reduced.get(self.next)?;
            self.next += 1;
            if let Some(x) = self.visit(q, x) {
                return Some(x);
            }
        }
    }
}
