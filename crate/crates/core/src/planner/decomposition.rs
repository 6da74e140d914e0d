//! Root paths of the two query endpoints and where they meet.

use crate::hierarchy::{Hierarchy, MachineId, NodeId};

use super::PlanError;

/// One link of a root path: a machine and the local node in it that lies
/// on the path (the endpoint itself at index 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Link {
    pub machine: MachineId,
    pub node: u32,
}

impl Link {
    pub fn node_id(self) -> NodeId {
        NodeId::new(self.machine, self.node)
    }
}

/// `up` runs from `s_init` to the root. `down` runs from `s_goal` to the
/// meeting machine and is cut there: `down[beta].machine == up[alpha].machine`
/// while their nodes differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathDecomposition {
    pub up: Vec<Link>,
    pub down: Vec<Link>,
    pub alpha: usize,
    pub beta: usize,
}

impl PathDecomposition {
    pub fn levels(&self) -> usize {
        self.up.len()
    }

    pub fn meeting_machine(&self) -> MachineId {
        self.up[self.alpha].machine
    }

    /// Node of the meeting machine on the goal side.
    pub fn goal_node(&self) -> u32 {
        self.down[self.beta].node
    }

    pub fn is_degenerate(&self) -> bool {
        self.up[0] == self.down[0]
    }
}

fn chain(h: &Hierarchy, s: NodeId) -> Vec<Link> {
    let mut links = vec![Link { machine: s.machine, node: s.state }];
    let mut m = s.machine;
    while let Some(p) = h.parent(m) {
        links.push(Link { machine: p.machine, node: p.state });
        m = p.machine;
    }
    links
}

pub fn compute_paths(h: &Hierarchy, s_init: NodeId, s_goal: NodeId) -> Result<PathDecomposition, PlanError> {
    for s in [s_init, s_goal] {
        let valid = s.machine.index() < h.machine_count()
            && (s.state as usize) < h.machine(s.machine).state_count()
            && h.is_state(s);
        if !valid {
            return Err(PlanError::NotAState(s));
        }
    }
    let up = chain(h, s_init);
    let mut down = chain(h, s_goal);
    if s_init == s_goal {
        down.truncate(1);
        return Ok(PathDecomposition { up, down, alpha: 0, beta: 0 });
    }
    let (mut i, mut j) = (up.len() - 1, down.len() - 1);
    while up[i] == down[j] {
        i -= 1;
        j -= 1;
    }
    debug_assert_eq!(up[i].machine, down[j].machine);
    down.truncate(j + 1);
    Ok(PathDecomposition { up, down, alpha: i, beta: j })
}
