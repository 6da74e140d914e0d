//! Deterministic hierarchy builders: the recursive depth family, the
//! warehouse robot, seeded random hierarchies and a small hand fixture.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hierarchy::{GlobalState, Hierarchy, HierarchyBuilder, HierarchyError, MachineId, MealyMachine, Transition};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

fn t(target: u32, cost: f64) -> Option<Transition> {
    Some(Transition { target, cost })
}

/// Nested copies of a 3-state machine. States `1` and `3` are refined into
/// a fresh copy until `depth` levels exist, giving `2^(depth+1) - 1` states
/// and `2^depth - 1` machines.
///
/// Inputs `x`, `y`, `z`, unit costs, start `2`. `x` moves 1→2→3 and `y`
/// moves 3→2→1; `z` is a self-loop on `2`. `x` at `3` and `y` at `1` are
/// undefined, which is what lets a nested copy hand control back to its
/// parent.
pub fn gen_recursive(depth: usize) -> Result<Hierarchy, GenError> {
    if depth == 0 {
        return Err(GenError::InvalidParams("depth must be at least 1".into()));
    }
    if depth > 30 {
        return Err(GenError::InvalidParams(format!("depth {depth} is too large")));
    }
    let states: Arc<[String]> = ["1", "2", "3"].iter().map(|s| s.to_string()).collect();
    // Rows are states 1, 2, 3; columns are inputs x, y, z.
    #[rustfmt::skip]
    let table: Arc<[Option<Transition>]> = vec![
        t(1, 1.0), None,      None,
        t(2, 1.0), t(0, 1.0), t(1, 1.0),
        None,      t(1, 1.0), None,
    ]
    .into();
    let count = (1usize << depth) - 1;
    let machines: Vec<MealyMachine> =
        (0..count).map(|i| MealyMachine::from_shared(format!("m{i}"), states.clone(), 1, 3, table.clone())).collect();
    // Heap layout: machine i refines its states 1 and 3 into 2i+1 and 2i+2.
    let internal = (1usize << (depth - 1)) - 1;
    let mut refinements = Vec::with_capacity(2 * internal);
    for i in 0..internal {
        refinements.push((MachineId(i as u32), 0, MachineId(2 * i as u32 + 1)));
        refinements.push((MachineId(i as u32), 2, MachineId(2 * i as u32 + 2)));
    }
    let inputs = vec!["x".into(), "y".into(), "z".into()];
    Ok(Hierarchy::new(inputs, machines, MachineId(0), &refinements)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarehouseParams {
    pub houses: usize,
    pub grid: usize,
    pub rack: usize,
    pub house_cost: f64,
    pub grid_cost: f64,
    pub desk_cost: f64,
    pub scan_cost: f64,
}

impl Default for WarehouseParams {
    fn default() -> Self {
        WarehouseParams {
            houses: 10,
            grid: 10,
            rack: 3,
            house_cost: 100.0,
            grid_cost: 1.0,
            desk_cost: 0.5,
            scan_cost: 10.0,
        }
    }
}

const LEFT: usize = 0;
const RIGHT: usize = 1;
const UP: usize = 2;
const DOWN: usize = 3;
const SCAN: usize = 4;
const WAREHOUSE_INPUTS: [&str; 5] = ["left", "right", "up", "down", "scan"];

/// Robot in a row of warehouses. Top level: houses `h1..hN` linked by
/// `left`/`right`. Each house is a grid room: an `entrance` next to cell
/// `g1_1`, and cells `g{r}_{c}`. Each cell holds a test-tube rack: an
/// `entrance` plus one state per (arm position, scanned tube) pair, named
/// `t{a}_{b}_none` or `t{a}_{b}_s{c}_{d}`.
///
/// Moves off the edge of the house row, a grid or a rack are self-loops. `scan` at a rack entrance picks up the
/// arm at tube (1,1); `up` from tube (1,1) puts it back. A tube can be
/// scanned once; scanning again is a costly self-loop.
pub fn gen_warehouse(p: &WarehouseParams) -> Result<Hierarchy, GenError> {
    if p.houses == 0 || p.grid == 0 || p.rack == 0 {
        return Err(GenError::InvalidParams("houses, grid and rack must be at least 1".into()));
    }
    for (name, c) in [
        ("house_cost", p.house_cost),
        ("grid_cost", p.grid_cost),
        ("desk_cost", p.desk_cost),
        ("scan_cost", p.scan_cost),
    ] {
        if !c.is_finite() || c < 0.0 {
            return Err(GenError::InvalidParams(format!("{name} must be finite and nonnegative")));
        }
    }
    let n_in = WAREHOUSE_INPUTS.len();

    // Houses.
    let house_states: Vec<String> = (1..=p.houses).map(|i| format!("h{i}")).collect();
    let mut houses = vec![None; p.houses * n_in];
    for i in 0..p.houses {
        houses[i * n_in + LEFT] = t(i.saturating_sub(1) as u32, p.house_cost);
        houses[i * n_in + RIGHT] = t((i + 1).min(p.houses - 1) as u32, p.house_cost);
    }

    // Room grid: state 0 is the entrance, cell (r, c) is 1 + (r-1)*G + (c-1).
    let g = p.grid;
    let cell = |r: usize, c: usize| (1 + (r - 1) * g + (c - 1)) as u32;
    let mut room_states = vec!["entrance".to_owned()];
    for r in 1..=g {
        for c in 1..=g {
            room_states.push(format!("g{r}_{c}"));
        }
    }
    let mut room = vec![None; room_states.len() * n_in];
    room[DOWN] = t(cell(1, 1), p.grid_cost);
    for r in 1..=g {
        for c in 1..=g {
            let row = cell(r, c) as usize * n_in;
            let stay = cell(r, c);
            room[row + LEFT] = t(if c > 1 { cell(r, c - 1) } else { stay }, p.grid_cost);
            room[row + RIGHT] = t(if c < g { cell(r, c + 1) } else { stay }, p.grid_cost);
            room[row + UP] = t(
                if r > 1 {
                    cell(r - 1, c)
                } else if c == 1 {
                    0
                } else {
                    stay
                },
                p.grid_cost,
            );
            room[row + DOWN] = t(if r < g { cell(r + 1, c) } else { stay }, p.grid_cost);
        }
    }

    // Rack: state 0 is the entrance; status 0 is "none", status k > 0 is
    // "scanned tube k-1" in row-major order.
    let k = p.rack;
    let statuses = k * k + 1;
    let tube = |a: usize, b: usize, status: usize| (1 + ((a - 1) * k + (b - 1)) * statuses + status) as u32;
    let mut rack_states = vec!["entrance".to_owned()];
    for a in 1..=k {
        for b in 1..=k {
            rack_states.push(format!("t{a}_{b}_none"));
            for c in 1..=k {
                for d in 1..=k {
                    rack_states.push(format!("t{a}_{b}_s{c}_{d}"));
                }
            }
        }
    }
    let mut rack = vec![None; rack_states.len() * n_in];
    rack[SCAN] = t(tube(1, 1, 0), p.desk_cost);
    for a in 1..=k {
        for b in 1..=k {
            for s in 0..statuses {
                let here = tube(a, b, s);
                let row = here as usize * n_in;
                rack[row + LEFT] = t(if b > 1 { tube(a, b - 1, s) } else { here }, p.desk_cost);
                rack[row + RIGHT] = t(if b < k { tube(a, b + 1, s) } else { here }, p.desk_cost);
                rack[row + UP] = t(
                    if a > 1 {
                        tube(a - 1, b, s)
                    } else if b == 1 {
                        0
                    } else {
                        here
                    },
                    p.desk_cost,
                );
                rack[row + DOWN] = t(if a < k { tube(a + 1, b, s) } else { here }, p.desk_cost);
                let scanned = if s == 0 { tube(a, b, 1 + (a - 1) * k + (b - 1)) } else { here };
                rack[row + SCAN] = t(scanned, p.scan_cost);
            }
        }
    }

    let room_states: Arc<[String]> = room_states.into();
    let room: Arc<[Option<Transition>]> = room.into();
    let rack_states: Arc<[String]> = rack_states.into();
    let rack: Arc<[Option<Transition>]> = rack.into();

    let mut machines = vec![MealyMachine::new("houses", house_states, 0, n_in, houses)];
    let mut refinements = Vec::new();
    for i in 1..=p.houses {
        let room_id = MachineId(machines.len() as u32);
        machines.push(MealyMachine::from_shared(format!("house{i}"), room_states.clone(), 0, n_in, room.clone()));
        refinements.push((MachineId(0), i as u32 - 1, room_id));
        for r in 1..=g {
            for c in 1..=g {
                let rack_id = MachineId(machines.len() as u32);
                machines.push(MealyMachine::from_shared(
                    format!("house{i}_g{r}_{c}"),
                    rack_states.clone(),
                    0,
                    n_in,
                    rack.clone(),
                ));
                refinements.push((room_id, cell(r, c), rack_id));
            }
        }
    }
    let inputs = WAREHOUSE_INPUTS.iter().map(|s| s.to_string()).collect();
    Ok(Hierarchy::new(inputs, machines, MachineId(0), &refinements)?)
}

/// The standard warehouse query: arm at the last tube having scanned it,
/// in the far corner cell, in the first house and in the last house.
pub fn warehouse_query(p: &WarehouseParams) -> (GlobalState, GlobalState) {
    let (g, k) = (p.grid, p.rack);
    let at = |house: usize| GlobalState(vec![format!("h{house}"), format!("g{g}_{g}"), format!("t{k}_{k}_s{k}_{k}")]);
    (at(1), at(p.houses))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub seed: u64,
    pub max_depth: usize,
    pub max_states: usize,
    pub inputs: usize,
    /// Probability that a given (state, input) transition is defined.
    pub density: f64,
    pub cost_min: f64,
    pub cost_max: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { seed: 0, max_depth: 4, max_states: 5, inputs: 3, density: 0.6, cost_min: 0.5, cost_max: 10.0 }
    }
}

/// Random costs are multiples of this, so every plan cost is an exact sum.
const COST_QUANTUM: f64 = 1.0 / 64.0;

/// Seeded random hierarchy. A state at level `l` is refined with
/// probability `0.6 / l`, and never at `max_depth`.
pub fn gen_random(p: &RandomParams) -> Result<Hierarchy, GenError> {
    if p.max_depth == 0 || p.max_states == 0 || p.inputs == 0 {
        return Err(GenError::InvalidParams("depth, states and inputs must be at least 1".into()));
    }
    if !(p.density > 0.0 && p.density <= 1.0) {
        return Err(GenError::InvalidParams("density must lie in (0, 1]".into()));
    }
    if !(p.cost_min.is_finite() && p.cost_max.is_finite() && 0.0 <= p.cost_min && p.cost_min <= p.cost_max) {
        return Err(GenError::InvalidParams("cost range must be finite, nonnegative and ordered".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let lo = (p.cost_min / COST_QUANTUM).ceil() as i64;
    let hi = ((p.cost_max / COST_QUANTUM).floor() as i64).max(lo);
    let inputs: Vec<String> = (0..p.inputs).map(|i| format!("i{i}")).collect();
    let mut b = HierarchyBuilder::new(&inputs);
    // (machine, level), processed breadth first.
    let mut queue = std::collections::VecDeque::new();
    let root = random_machine(&mut b, &mut rng, p, &inputs, 0, lo, hi)?;
    queue.push_back((root, 1usize));
    let mut next_id = 1;
    while let Some((m, level)) = queue.pop_front() {
        if level >= p.max_depth {
            continue;
        }
        let n = b.state_count(m);
        for s in 0..n {
            if rng.random_bool(0.6 / level as f64) {
                let child = random_machine(&mut b, &mut rng, p, &inputs, next_id, lo, hi)?;
                next_id += 1;
                b.refine(m, &s.to_string(), child)?;
                queue.push_back((child, level + 1));
            }
        }
    }
    Ok(b.build(root)?)
}

fn random_machine(
    b: &mut HierarchyBuilder,
    rng: &mut ChaCha8Rng,
    p: &RandomParams,
    inputs: &[String],
    id: usize,
    lo: i64,
    hi: i64,
) -> Result<MachineId, GenError> {
    let n = rng.random_range(1..=p.max_states);
    let states: Vec<String> = (0..n).map(|s| s.to_string()).collect();
    let start = rng.random_range(0..n);
    let m = b.machine(&format!("r{id}"), &states, &states[start])?;
    for s in &states {
        for x in inputs {
            if rng.random_bool(p.density) {
                let to = &states[rng.random_range(0..n)];
                let cost = rng.random_range(lo..=hi) as f64 * COST_QUANTUM;
                b.transition(m, s, x, to, cost)?;
            }
        }
    }
    Ok(m)
}

/// Ten-state, unit-cost hand fixture. States are named by number; each
/// machine is named by the range of states it contains, e.g. `1-8`.
///
/// ```text
/// root:  [1-8] --y--> [9-10]
/// 1-8:   [1-2] --x--> 3 --x--> [4-6] --x--> [7-8]
/// 1-2:   1 --x--> 2          4-6:  [4-5] --y--> 6
/// 4-5:   4 --x--> 5          7-8:  7 --x--> 8
/// 9-10:  9 --x--> 10
/// ```
pub fn fig2_fixture() -> Hierarchy {
    let build = || -> Result<Hierarchy, HierarchyError> {
        let mut b = HierarchyBuilder::new(&["x", "y", "z"]);
        let root = b.machine("root", &["1-8", "9-10"], "1-8")?;
        let m18 = b.machine("1-8", &["1-2", "3", "4-6", "7-8"], "1-2")?;
        let m12 = b.machine("1-2", &["1", "2"], "1")?;
        let m46 = b.machine("4-6", &["4-5", "6"], "4-5")?;
        let m45 = b.machine("4-5", &["4", "5"], "4")?;
        let m78 = b.machine("7-8", &["7", "8"], "7")?;
        let m910 = b.machine("9-10", &["9", "10"], "9")?;
        b.transition(root, "1-8", "y", "9-10", 1.0)?;
        b.transition(m18, "1-2", "x", "3", 1.0)?;
        b.transition(m18, "3", "x", "4-6", 1.0)?;
        b.transition(m18, "4-6", "x", "7-8", 1.0)?;
        b.transition(m12, "1", "x", "2", 1.0)?;
        b.transition(m46, "4-5", "y", "6", 1.0)?;
        b.transition(m45, "4", "x", "5", 1.0)?;
        b.transition(m78, "7", "x", "8", 1.0)?;
        b.transition(m910, "9", "x", "10", 1.0)?;
        b.refine(root, "1-8", m18)?;
        b.refine(root, "9-10", m910)?;
        b.refine(m18, "1-2", m12)?;
        b.refine(m18, "4-6", m46)?;
        b.refine(m18, "7-8", m78)?;
        b.refine(m46, "4-5", m45)?;
        b.build(root)
    };
    build().expect("fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{validate, NodeId};

    #[test]
    fn recursive_counts() {
        let h = gen_recursive(1).unwrap();
        assert_eq!(h.stats().states, 3);
        let h = gen_recursive(2).unwrap();
        assert_eq!((h.stats().states, h.machine_count(), h.depth()), (7, 3, 2));
        assert!(gen_recursive(0).is_err());
    }

    #[test]
    fn recursive_start_state_follows_start_twice() {
        // Start `2` is never refined, so the root's start state is its own `2`.
        let h = gen_recursive(2).unwrap();
        assert_eq!(h.start_state(h.root()).unwrap(), NodeId::new(h.root(), 1));
        let child = h.child(NodeId::new(h.root(), 0)).unwrap();
        assert_eq!(h.start_state(child).unwrap(), NodeId::new(child, 1));
    }

    #[test]
    fn warehouse_shape() {
        let h = gen_warehouse(&WarehouseParams::default()).unwrap();
        let s = h.stats();
        assert_eq!((s.depth, s.states, s.machines), (3, 91_010, 1011));
        let rack = h.machine_by_id("house1_g1_1").unwrap();
        assert_eq!(h.machine(rack).state_count(), 91);
        assert_eq!(h.machine(h.machine_by_id("house1").unwrap()).state_count(), 101);
        let (a, b) = warehouse_query(&WarehouseParams::default());
        assert_eq!(a.to_string(), "h1/g10_10/t3_3_s3_3");
        assert!(h.resolve(&a).is_ok() && h.resolve(&b).is_ok());
    }

    #[test]
    fn warehouse_house_move() {
        let h = gen_warehouse(&WarehouseParams::default()).unwrap();
        let e1 = h.resolve(&"h1/entrance".parse().unwrap()).unwrap();
        let e2 = h.resolve(&"h2/entrance".parse().unwrap()).unwrap();
        let e3 = h.resolve(&"h3/entrance".parse().unwrap()).unwrap();
        let right = h.input_id("right").unwrap();
        assert_eq!(h.step(e1, right).map(|(n, c)| (n, c.value())), Some((e2, 100.0)));
        let run = h.run_plan(e1, &[right, right]);
        assert_eq!((run.end, run.cost.value()), (Some(e3), 200.0));
        let left = h.input_id("left").unwrap();
        assert_eq!(h.step(e1, left).map(|(n, c)| (n, c.value())), Some((e1, 100.0)));
    }

    #[test]
    fn random_is_reproducible_and_valid() {
        let p = RandomParams { seed: 42, ..Default::default() };
        let a = gen_random(&p).unwrap();
        let b = gen_random(&p).unwrap();
        assert_eq!(a, b);
        assert!(validate(&a).is_valid());
        assert!(a.depth() <= p.max_depth);
    }

    #[test]
    fn dense_single_machine() {
        let p = RandomParams { seed: 3, max_depth: 1, density: 1.0, ..Default::default() };
        let h = gen_random(&p).unwrap();
        assert_eq!(h.machine_count(), 1);
        assert!(h.machine(h.root()).transition_table().iter().all(Option::is_some));
    }

    #[test]
    fn fixture_facts() {
        let h = fig2_fixture();
        let two = h.resolve(&"1-8/1-2/2".parse().unwrap()).unwrap();
        let nine = h.resolve(&"9-10/9".parse().unwrap()).unwrap();
        let y = h.input_id("y").unwrap();
        assert_eq!(h.step(two, y).map(|(n, c)| (n, c.value())), Some((nine, 1.0)));
        let m910 = h.machine_by_id("9-10").unwrap();
        assert_eq!(h.start_state(m910).unwrap(), nine);
        assert_eq!(h.stats().states, 10);
    }
}
