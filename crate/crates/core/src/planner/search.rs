//! Two-part search over the reduced hierarchy.
//!
//! Part 1 reaches the goal-side node of the meeting machine from `s_init`
//! through a small graph whose vertices are the few reduced states where a
//! search can start: `s_init`, the landing state of entering each up-path
//! machine, and the landing state of leaving it with each input. Each
//! vertex gets its arcs from one Dijkstra run inside its own machine.
//! Part 2 then descends the goal path with one Dijkstra per machine.

use std::collections::HashMap;

use crate::cost::Cost;
use crate::dijkstra::{dijkstra, AdjacencyGraph, Graph};
use crate::exit_costs::Step;
use crate::hierarchy::{InputId, MachineId, NodeId};

use super::reduced::ReducedHiMM;

/// A reduced state on the up path: level `k` (0 = `s_init`'s machine) and
/// a local state of that level's machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub level: usize,
    pub state: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitLanding {
    pub to: Vertex,
    /// Cost of the transition finally taken above the exited machine.
    pub climb: Cost,
}

/// Where entering / leaving each up-path machine lands in the reduced
/// hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct Transitions {
    pub enter: Vec<Vertex>,
    /// `exit[k][x]`; `None` when leaving level `k` with `x` stops the machine.
    pub exit: Vec<Vec<Option<ExitLanding>>>,
}

/// Chain node of level `k`: the node refining level `k - 1`.
fn chain_node(r: &ReducedHiMM, k: usize) -> Option<u32> {
    (k >= 1).then(|| r.paths().up[k].node)
}

fn resolve(r: &ReducedHiMM, enter: &[Vertex], k: usize, v: u32) -> Vertex {
    if chain_node(r, k) == Some(v) {
        enter[k - 1]
    } else {
        Vertex { level: k, state: v }
    }
}

/// Bottom-up sweep for entries, then top-down sweep for exits.
pub fn compute_transitions(r: &ReducedHiMM) -> Transitions {
    let h = r.hierarchy();
    let up = &r.paths().up;
    let n = up.len();
    let mut enter: Vec<Vertex> = Vec::with_capacity(n);
    for (k, link) in up.iter().enumerate() {
        let start = h.machine(link.machine).start();
        let v = resolve(r, &enter, k, start);
        enter.push(v);
    }
    let inputs = h.input_count();
    let mut exit = vec![vec![None; inputs]; n];
    for k in (0..n.saturating_sub(1)).rev() {
        let parent = up[k + 1].node_id();
        for x in h.input_ids() {
            exit[k][x.index()] = match h.transition(parent, x) {
                Some(t) => {
                    Some(ExitLanding { to: resolve(r, &enter, k + 1, t.target), climb: Cost::from_valid(t.cost) })
                }
                None => exit[k + 1][x.index()],
            };
        }
    }
    Transitions { enter, exit }
}

/// One machine of the reduced hierarchy as a search graph: local states,
/// then one exit vertex per input when `exits` is set. Sinks are never
/// expanded.
struct LevelGraph<'r, 'a> {
    r: &'r ReducedHiMM<'a>,
    machine: MachineId,
    states: usize,
    exits: bool,
    sinks: [Option<u32>; 2],
}

impl Graph for LevelGraph<'_, '_> {
    type Edge = Step;

    fn vertex_count(&self) -> usize {
        self.states + if self.exits { self.r.hierarchy().input_count() } else { 0 }
    }

    fn for_each_edge<F: FnMut(usize, f64, Step)>(&self, v: usize, mut f: F) {
        if v >= self.states || self.sinks.contains(&Some(v as u32)) {
            return;
        }
        let h = self.r.hierarchy();
        let q = NodeId::new(self.machine, v as u32);
        for x in h.input_ids() {
            let step = Step { state: v as u32, input: x };
            let w = self.r.gamma_bar(q, x).value();
            match h.transition(q, x) {
                Some(t) => f(t.target as usize, w, step),
                None if self.exits => f(self.states + x.index(), w, step),
                None => {}
            }
        }
    }
}

/// Reduced steps of one arc of the Part 1 graph.
#[derive(Clone, Debug)]
struct ArcSteps {
    steps: Vec<(NodeId, InputId)>,
}

/// The Part 1 graph. `vertices[i]` is the reduced state of vertex `i`.
#[derive(Clone, Debug)]
pub struct SearchGraph {
    pub vertices: Vec<Vertex>,
    graph: AdjacencyGraph<usize>,
    arcs: Vec<ArcSteps>,
    pub source: usize,
    pub goal: Option<usize>,
    pub searches: usize,
}

impl SearchGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }
}

/// Builds the Part 1 graph, adding only vertices reachable from `s_init`.
pub fn build_search_graph(r: &ReducedHiMM, tr: &Transitions) -> SearchGraph {
    let h = r.hierarchy();
    let paths = r.paths();
    let n = paths.levels();
    let (alpha, goal_node) = (paths.alpha, paths.goal_node());
    let goal = Vertex { level: alpha, state: goal_node };
    let source = Vertex { level: 0, state: paths.up[0].node };

    let mut sg = SearchGraph {
        vertices: vec![source],
        graph: AdjacencyGraph::new(1),
        arcs: Vec::new(),
        source: 0,
        goal: None,
        searches: 0,
    };
    let mut index: HashMap<Vertex, usize> = HashMap::from([(source, 0)]);
    let mut vertex = |sg: &mut SearchGraph, v: Vertex| -> usize {
        *index.entry(v).or_insert_with(|| {
            sg.vertices.push(v);
            sg.graph.add_vertex()
        })
    };
    if source == goal {
        sg.goal = Some(0);
        return sg;
    }

    let mut next = 0;
    while next < sg.vertices.len() {
        let from = next;
        next += 1;
        let v = sg.vertices[from];
        if v == goal {
            continue;
        }
        let k = v.level;
        let machine = paths.up[k].machine;
        let lg = LevelGraph {
            r,
            machine,
            states: h.machine(machine).state_count(),
            exits: k + 1 < n,
            sinks: [chain_node(r, k), (k == alpha).then_some(goal_node)],
        };
        let mut targets: Vec<(usize, Vertex, Cost)> = Vec::new();
        if let Some(c) = chain_node(r, k) {
            targets.push((c as usize, tr.enter[k - 1], Cost::ZERO));
        }
        if k == alpha {
            targets.push((goal_node as usize, goal, Cost::ZERO));
        }
        if lg.exits {
            for x in h.input_ids() {
                if let Some(landing) = tr.exit[k][x.index()] {
                    targets.push((lg.states + x.index(), landing.to, landing.climb));
                }
            }
        }
        let local: Vec<usize> = targets.iter().map(|t| t.0).collect();
        let found = dijkstra(&lg, v.state as usize, &local);
        sg.searches += 1;
        for (t, to, extra) in targets {
            let Some(route) = found.route(t) else { continue };
            let cost = route.cost + extra;
            if cost.is_infinite() {
                continue;
            }
            let steps = route.edges.iter().map(|s| (NodeId::new(machine, s.state), s.input)).collect();
            let to = vertex(&mut sg, to);
            sg.graph.add_edge(from, to, cost.value(), sg.arcs.len());
            sg.arcs.push(ArcSteps { steps });
        }
    }
    sg.goal = index.get(&goal).copied();
    sg
}

/// Result of the two-part search.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSolution {
    pub cost: Cost,
    /// Part 1 followed by Part 2.
    pub trajectory: Vec<(NodeId, InputId)>,
    /// Length of the Part 1 prefix of `trajectory`.
    pub part1_len: usize,
}

/// Goal-side machine as a search graph: defined transitions only, with
/// the goal-path node as the single sink.
struct DownGraph<'r, 'a> {
    r: &'r ReducedHiMM<'a>,
    machine: MachineId,
    states: usize,
    sink: u32,
}

impl Graph for DownGraph<'_, '_> {
    type Edge = Step;

    fn vertex_count(&self) -> usize {
        self.states
    }

    fn for_each_edge<F: FnMut(usize, f64, Step)>(&self, v: usize, mut f: F) {
        if v as u32 == self.sink {
            return;
        }
        let h = self.r.hierarchy();
        let q = NodeId::new(self.machine, v as u32);
        for x in h.input_ids() {
            if let Some(t) = h.transition(q, x) {
                f(t.target as usize, self.r.gamma_bar(q, x).value(), Step { state: v as u32, input: x });
            }
        }
    }
}

/// Entering goal-path machine `j` at its start: descends while the start
/// is itself the next goal-path node. Returns the level and local state
/// where the next search begins.
fn descend_down(r: &ReducedHiMM, mut j: usize) -> (usize, u32) {
    let h = r.hierarchy();
    let down = &r.paths().down;
    loop {
        let s = h.machine(down[j].machine).start();
        if j >= 1 && s == down[j].node {
            j -= 1;
        } else {
            return (j, s);
        }
    }
}

/// Part 1 in `sg`, then Part 2 down the goal path. `None` when infeasible.
pub fn solve_reduced(r: &ReducedHiMM, sg: &SearchGraph) -> Option<ReducedSolution> {
    let goal = sg.goal?;
    let found = dijkstra(&sg.graph, sg.source, &[goal]);
    let route = found.route(goal)?;
    let mut trajectory: Vec<(NodeId, InputId)> = Vec::new();
    for &a in &route.edges {
        trajectory.extend_from_slice(&sg.arcs[a].steps);
    }
    let part1_len = trajectory.len();
    let mut cost = route.cost;

    let paths = r.paths();
    if paths.beta >= 1 {
        let (mut j, mut c) = descend_down(r, paths.beta - 1);
        loop {
            let g = paths.down[j].node;
            if c != g {
                let machine = paths.down[j].machine;
                let dg = DownGraph { r, machine, states: r.hierarchy().machine(machine).state_count(), sink: g };
                let leg = dijkstra(&dg, c as usize, &[g as usize]).route(g as usize)?;
                cost = cost + leg.cost;
                trajectory.extend(leg.edges.iter().map(|s| (NodeId::new(machine, s.state), s.input)));
            }
            if j == 0 {
                break;
            }
            (j, c) = descend_down(r, j - 1);
        }
    }
    Some(ReducedSolution { cost, trajectory, part1_len })
}

/// Same-machine query at the root level: a single search, no graph.
pub fn solve_single_level(r: &ReducedHiMM) -> Option<ReducedSolution> {
    let paths = r.paths();
    debug_assert!(paths.levels() == 1 && paths.beta == 0);
    let machine = paths.up[0].machine;
    let goal = paths.goal_node();
    let dg = DownGraph { r, machine, states: r.hierarchy().machine(machine).state_count(), sink: goal };
    let route = dijkstra(&dg, paths.up[0].node as usize, &[goal as usize]).route(goal as usize)?;
    let trajectory: Vec<_> = route.edges.iter().map(|s| (NodeId::new(machine, s.state), s.input)).collect();
    Some(ReducedSolution { cost: route.cost, part1_len: trajectory.len(), trajectory })
}
