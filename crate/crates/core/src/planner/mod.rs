//! Online step: optimal plan between two states using precomputed exit
//! costs.

pub mod decomposition;
pub mod expand;
pub mod reduced;
pub mod search;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cost::Cost;
use crate::exit_costs::ExitCostTable;
use crate::hierarchy::{Hierarchy, InputId, NodeId};
use crate::par::Parallelism;

pub use decomposition::{compute_paths, Link, PathDecomposition};
pub use expand::{expand_plan, optimal_expansion, PlanStream};
pub use reduced::ReducedHiMM;
pub use search::{build_search_graph, compute_transitions, solve_reduced, SearchGraph, Transitions, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("{0:?} is not a state of the hierarchy")]
    NotAState(NodeId),
    #[error("exit-cost table does not match the hierarchy")]
    TableMismatch,
    #[error("node {node:?} cannot be left with input #{}", input.0)]
    NoExit { node: NodeId, input: InputId },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlanStats {
    /// Vertices and arcs of the Part 1 graph.
    pub g_vertices: usize,
    pub g_arcs: usize,
    /// Single-machine Dijkstra runs used to build it.
    pub searches: usize,
    pub reduce_time: Duration,
    pub search_time: Duration,
    pub expand_time: Duration,
}

impl PlanStats {
    pub fn total_time(&self) -> Duration {
        self.reduce_time + self.search_time + self.expand_time
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub feasible: bool,
    /// `s_init == s_goal`: answered with the empty plan at cost 0.
    pub degenerate: bool,
    pub cost: Cost,
    pub plan: Vec<InputId>,
    /// State trajectory induced by `plan`.
    pub trajectory: Vec<(NodeId, InputId)>,
    /// Optimal trajectory of the reduced hierarchy.
    pub reduced: Vec<(NodeId, InputId)>,
    /// Number of leading `reduced` steps that reach the goal-side node of
    /// the meeting machine.
    pub part1_len: usize,
    pub stats: PlanStats,
}

impl PlanResult {
    fn infeasible(stats: PlanStats) -> PlanResult {
        PlanResult {
            feasible: false,
            degenerate: false,
            cost: Cost::INFINITY,
            plan: Vec::new(),
            trajectory: Vec::new(),
            reduced: Vec::new(),
            part1_len: 0,
            stats,
        }
    }
}

/// Optimal plan from `s_init` to `s_goal`. Infeasible queries are reported
/// in the result, not as errors.
pub fn plan(h: &Hierarchy, table: &ExitCostTable, s_init: NodeId, s_goal: NodeId) -> Result<PlanResult, PlanError> {
    if !table.fits(h) {
        return Err(PlanError::TableMismatch);
    }
    let mut stats = PlanStats::default();
    let t0 = Instant::now();
    let paths = compute_paths(h, s_init, s_goal)?;
    if paths.is_degenerate() {
        stats.reduce_time = t0.elapsed();
        return Ok(PlanResult {
            feasible: true,
            degenerate: true,
            cost: Cost::ZERO,
            plan: Vec::new(),
            trajectory: Vec::new(),
            reduced: Vec::new(),
            part1_len: 0,
            stats,
        });
    }
    let single = paths.levels() == 1 && paths.beta == 0;
    let r = ReducedHiMM::new(h, table, paths);
    let solution = if single {
        stats.reduce_time = t0.elapsed();
        let t1 = Instant::now();
        let s = search::solve_single_level(&r);
        stats.searches = 1;
        stats.search_time = t1.elapsed();
        s
    } else {
        let tr = compute_transitions(&r);
        stats.reduce_time = t0.elapsed();
        let t1 = Instant::now();
        let sg = build_search_graph(&r, &tr);
        let s = solve_reduced(&r, &sg);
        stats.g_vertices = sg.vertex_count();
        stats.g_arcs = sg.arc_count();
        stats.searches = sg.searches;
        stats.search_time = t1.elapsed();
        s
    };
    let Some(solution) = solution else {
        return Ok(PlanResult::infeasible(stats));
    };
    let t2 = Instant::now();
    let trajectory = expand_plan(h, table, &solution.trajectory)?;
    stats.expand_time = t2.elapsed();
    Ok(PlanResult {
        feasible: true,
        degenerate: false,
        cost: solution.cost,
        plan: trajectory.iter().map(|s| s.1).collect(),
        trajectory,
        reduced: solution.trajectory,
        part1_len: solution.part1_len,
        stats,
    })
}

/// Independent queries against one hierarchy, in parallel when enabled.
pub fn plan_batch(
    h: &Hierarchy,
    table: &ExitCostTable,
    queries: &[(NodeId, NodeId)],
    par: Parallelism,
) -> Vec<Result<PlanResult, PlanError>> {
    par.map(queries, |&(a, b)| plan(h, table, a, b))
}
