//! Optimal planning in hierarchical Mealy machines.
//!
//! Exit costs for every machine are computed once ([`compute_exit_tables`]);
//! each query then only searches the machines on the two root paths of its
//! endpoints ([`plan`]). [`flat`] provides the flat Dijkstra baseline used
//! to check the planner.

pub mod bench;
pub mod cost;
pub mod dijkstra;
pub mod exit_costs;
pub mod flat;
pub mod generators;
pub mod hierarchy;
pub mod io;
pub mod par;
pub mod planner;

pub use cost::Cost;
pub use exit_costs::{compute_exit_tables, compute_exit_tables_with, exit_cost, ExitCostTable, Step};
pub use flat::{flat_plan, flatten, FlatMachine, FlatPlan};
pub use hierarchy::{
    validate, GlobalState, Hierarchy, HierarchyBuilder, HierarchyError, InputId, MachineId, MealyMachine, NodeId,
    Transition, ValidationReport,
};
pub use par::Parallelism;
pub use planner::{plan, plan_batch, PlanResult};
