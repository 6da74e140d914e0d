//! Depth sweep on the recursive family: offline, online and flat timings
//! plus a cost cross-check, one CSV row per run.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::exit_costs::compute_exit_tables_with;
use crate::flat::{flat_plan, flatten_with};
use crate::generators::{gen_recursive, GenError};
use crate::hierarchy::{Hierarchy, NodeId};
use crate::par::Parallelism;
use crate::planner::{plan, PlanError};

pub const CSV_HEADER: &str = "instance,depth,states,offline_s,online_s,flat_s,h_cost,f_cost,equal";

/// Tolerance for comparing hierarchical and flat costs.
pub const COST_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub depth: usize,
    pub states: usize,
    pub offline_s: f64,
    pub online_s: f64,
    /// Empty when the flat baseline was skipped by the size limit.
    pub flat_s: Option<f64>,
    pub h_cost: f64,
    pub f_cost: Option<f64>,
    pub equal: Option<bool>,
}

/// Whether two optimal costs agree: within tolerance, or both infeasible.
pub fn costs_equal(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= COST_TOLERANCE
}

fn descend(h: &Hierarchy, mut node: NodeId, last: bool) -> NodeId {
    while let Some(c) = h.child(node) {
        let n = h.machine(c).state_count() as u32;
        node = NodeId::new(c, if last { n - 1 } else { 0 });
    }
    node
}

/// Endpoints for the depth sweep: the leftmost leaf of the root's first
/// refined node and the rightmost leaf of its last refined node. Without
/// refined nodes, the root's first and last states.
pub fn opposite_states(h: &Hierarchy) -> (NodeId, NodeId) {
    let root = h.root();
    let n = h.machine(root).state_count() as u32;
    let refined: Vec<u32> = (0..n).filter(|&s| h.child(NodeId::new(root, s)).is_some()).collect();
    match (refined.first(), refined.last()) {
        (Some(&a), Some(&b)) => (descend(h, NodeId::new(root, a), false), descend(h, NodeId::new(root, b), true)),
        _ => (NodeId::new(root, 0), NodeId::new(root, n - 1)),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub repetitions: usize,
    /// Largest flat state count for which the flat baseline runs.
    pub flat_limit: usize,
    pub parallelism: Parallelism,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { repetitions: 1, flat_limit: 4_000_000, parallelism: Parallelism::default() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("exit costs: {0}")]
    Exit(#[from] crate::exit_costs::ExitCostError),
}

/// Benchmarks one depth of the recursive family. Generation and
/// flattening are not timed; `flat_s` covers the flat search only.
pub fn run_depth(depth: usize, cfg: &SweepConfig) -> Result<Vec<BenchRecord>, BenchError> {
    let h = gen_recursive(depth)?;
    let (from, to) = opposite_states(&h);
    let states = h.stats().states;
    let fm = (states <= cfg.flat_limit).then(|| flatten_with(&h, cfg.parallelism));
    let mut rows = Vec::with_capacity(cfg.repetitions);
    for _ in 0..cfg.repetitions {
        let t0 = Instant::now();
        let table = compute_exit_tables_with(&h, cfg.parallelism)?;
        let offline_s = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let p = plan(&h, &table, from, to)?;
        let online_s = t1.elapsed().as_secs_f64();
        let h_cost = p.cost.value();
        let (flat_s, f_cost) = match &fm {
            Some(fm) => {
                let t2 = Instant::now();
                let f = flat_plan(fm, &h, from, to);
                (Some(t2.elapsed().as_secs_f64()), Some(f.cost.value()))
            }
            None => (None, None),
        };
        rows.push(BenchRecord {
            instance: format!("recursive-{depth}"),
            depth,
            states,
            offline_s,
            online_s,
            flat_s,
            h_cost,
            f_cost,
            equal: f_cost.map(|f| costs_equal(h_cost, f)),
        });
    }
    Ok(rows)
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRecord], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
