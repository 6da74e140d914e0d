//! Acceptance runner. Each criterion prints one `[AC-n] PASS|FAIL` line;
//! the process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use himm::bench::{costs_equal, opposite_states};
use himm::exit_costs::{compute_exit_tables, compute_exit_tables_with};
use himm::flat::{brute_force_machine_exit, flat_plan, flatten};
use himm::generators::{
    fig2_fixture, gen_random, gen_recursive, gen_warehouse, warehouse_query, RandomParams, WarehouseParams,
};
use himm::io::{load_cache, parse_himm, save_cache, serialize_himm};
use himm::planner::{plan, PlanStream};
use himm::{ExitCostTable, Hierarchy, NodeId, Parallelism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const FLAT_LIMIT: usize = 4_000_000;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn best_of<T>(n: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..n {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed());
        last = Some(v);
    }
    (best, last.expect("n > 0"))
}

/// Random suite shared by the oracle and expansion criteria.
fn random_params(i: u64) -> RandomParams {
    RandomParams {
        seed: 1000 + i,
        max_depth: 1 + (i % 5) as usize,
        max_states: 2 + (i % 5) as usize,
        inputs: 1 + (i % 4) as usize,
        density: 0.4 + 0.1 * (i % 6) as f64,
        cost_min: 0.5,
        cost_max: 10.0,
    }
}

fn random_pairs(h: &Hierarchy, seed: u64, n: usize) -> Vec<(NodeId, NodeId)> {
    let leaves: Vec<NodeId> = h.leaves().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (leaves[rng.random_range(0..leaves.len())], leaves[rng.random_range(0..leaves.len())])).collect()
}

fn oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let (mut queries, mut feasible) = (0, 0);
    for i in 0..200 {
        let h = gen_random(&random_params(i)).map_err(|e| e.to_string())?;
        let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
        let fm = flatten(&h);
        for (a, b) in random_pairs(&h, i, 8) {
            let p = plan(&h, &table, a, b).map_err(|e| e.to_string())?;
            let f = flat_plan(&fm, &h, a, b);
            ensure(p.feasible == f.feasible, || format!("seed {i}: feasibility differs for {a:?} -> {b:?}"))?;
            ensure(costs_equal(p.cost.value(), f.cost.value()), || {
                format!("seed {i}: {a:?} -> {b:?} costs {} vs flat {}", p.cost, f.cost)
            })?;
            queries += 1;
            feasible += p.feasible as usize;
        }
    }
    let elapsed = t0.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("200 hierarchies, {queries} queries ({feasible} feasible) in {:.2}s", elapsed.as_secs_f64()))
}

fn exit_cost_correctness() -> Outcome {
    let t0 = Instant::now();
    let mut entries = 0;
    let mut finite = 0;
    for i in 0..60u64 {
        let p = RandomParams {
            seed: 5000 + i,
            max_depth: 1 + (i % 4) as usize,
            max_states: 2 + (i % 5) as usize,
            inputs: 1 + (i % 4) as usize,
            density: 0.3 + 0.1 * (i % 6) as f64,
            ..Default::default()
        };
        let h = gen_random(&p).map_err(|e| e.to_string())?;
        let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
        let fm = flatten(&h);
        for m in h.machine_ids() {
            for x in h.input_ids() {
                let want = brute_force_machine_exit(&h, &fm, m, x);
                let got = table.cost(m, x);
                ensure(got == want, || format!("seed {}: machine {} input {x:?}: {got} vs {want}", p.seed, m.0))?;
                entries += 1;
                finite += got.is_finite() as usize;
            }
        }
    }
    let elapsed = t0.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("60 hierarchies, {entries} entries ({finite} finite) in {:.2}s", elapsed.as_secs_f64()))
}

fn fixture_facts() -> Outcome {
    let h = fig2_fixture();
    let two = h.resolve(&"1-8/1-2/2".parse().unwrap()).map_err(|e| e.to_string())?;
    let nine = h.resolve(&"9-10/9".parse().unwrap()).map_err(|e| e.to_string())?;
    let y = h.input_id("y").ok_or("no input y")?;
    let step = h.hierarchical_step(two, y).map_err(|e| e.to_string())?;
    ensure(step.map(|(n, c)| (n, c.value())) == Some((nine, 1.0)), || format!("psi(2, y) = {step:?}"))?;
    let m = h.machine_by_id("9-10").ok_or("no machine 9-10")?;
    let start = h.start_state(m).map_err(|e| e.to_string())?;
    ensure(start == nine, || format!("start state of 9-10 is {start:?}"))?;
    Ok("psi(2, y) = 9 at cost 1; start of {9, 10} is 9".into())
}

fn recursive_structure() -> Outcome {
    for d in 1..=20 {
        let h = gen_recursive(d).map_err(|e| e.to_string())?;
        let want = (1usize << (d + 1)) - 1;
        let got = h.stats().states;
        ensure(got == want, || format!("depth {d}: {got} states, expected {want}"))?;
        if d <= 14 {
            let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
            let (a, b) = opposite_states(&h);
            let p = plan(&h, &table, a, b).map_err(|e| e.to_string())?;
            let f = flat_plan(&flatten(&h), &h, a, b);
            ensure(p.feasible && p.cost == f.cost, || format!("depth {d}: cost {} vs flat {}", p.cost, f.cost))?;
        }
    }
    Ok("state counts exact for depths 1..=20; opposite-states costs equal flat for depths 1..=14".into())
}

fn recursive_performance() -> Outcome {
    let mut notes = Vec::new();
    {
        let h = gen_recursive(18).map_err(|e| e.to_string())?;
        let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
        let (a, b) = opposite_states(&h);
        let (online, p) = best_of(5, || plan(&h, &table, a, b));
        let p = p.map_err(|e| e.to_string())?;
        let fm = flatten(&h);
        let (flat, f) = best_of(3, || flat_plan(&fm, &h, a, b));
        ensure(p.cost == f.cost, || format!("depth 18: cost {} vs flat {}", p.cost, f.cost))?;
        let ratio = flat.as_secs_f64() / online.as_secs_f64();
        ensure(online < Duration::from_millis(100), || format!("depth 18 online {online:?}"))?;
        ensure(ratio >= 50.0, || format!("depth 18: online {online:?}, flat {flat:?}, ratio {ratio:.1}"))?;
        notes.push(format!("d=18 online {:.3}ms flat {:.1}ms ({ratio:.0}x)", ms(online), ms(flat)));
    }
    {
        let h = gen_recursive(20).map_err(|e| e.to_string())?;
        let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
        let (a, b) = opposite_states(&h);
        let (online, p) = best_of(5, || plan(&h, &table, a, b));
        let p = p.map_err(|e| e.to_string())?;
        ensure(online < Duration::from_secs(1), || format!("depth 20 online {online:?}"))?;
        if h.stats().states > FLAT_LIMIT {
            notes.push(format!("d=20 online {:.3}ms, flat gated", ms(online)));
        } else {
            let t = Instant::now();
            let f = flat_plan(&flatten(&h), &h, a, b);
            let flat = t.elapsed();
            ensure(p.cost == f.cost, || format!("depth 20: cost {} vs flat {}", p.cost, f.cost))?;
            let ratio = flat.as_secs_f64() / online.as_secs_f64();
            ensure(ratio > 10.0, || format!("depth 20: online {online:?}, flatten+search {flat:?}"))?;
            notes.push(format!("d=20 online {:.3}ms flatten+search {:.1}ms ({ratio:.0}x)", ms(online), ms(flat)));
        }
    }
    Ok(notes.join("; "))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn offline_linearity() -> Outcome {
    let mut times = Vec::new();
    for d in 14..=19 {
        let h = gen_recursive(d).map_err(|e| e.to_string())?;
        let (t, table) = best_of(3, || compute_exit_tables_with(&h, Parallelism::Sequential));
        table.map_err(|e| e.to_string())?;
        times.push((d, t));
    }
    let ratios: Vec<(usize, f64)> =
        times.windows(2).map(|w| (w[0].0, w[1].1.as_secs_f64() / w[0].1.as_secs_f64())).collect();
    let text = ratios.iter().map(|(d, r)| format!("{}/{d}: {r:.2}", d + 1)).collect::<Vec<_>>().join(", ");
    ensure(ratios.iter().all(|&(_, r)| (1.5..=3.0).contains(&r)), || format!("ratios out of band: {text}"))?;
    Ok(format!("ratios {text}"))
}

fn warehouse() -> Outcome {
    let params = WarehouseParams::default();
    let h = gen_warehouse(&params).map_err(|e| e.to_string())?;
    let s = h.stats();
    ensure((s.depth, s.states, s.machines) == (3, 91_010, 1011), || format!("shape {s:?}"))?;
    let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
    let (a, b) = warehouse_query(&params);
    let (a, b) = (h.resolve(&a).map_err(|e| e.to_string())?, h.resolve(&b).map_err(|e| e.to_string())?);
    let (online, p) = best_of(5, || plan(&h, &table, a, b));
    let p = p.map_err(|e| e.to_string())?;
    let fm = flatten(&h);
    let (flat, f) = best_of(3, || flat_plan(&fm, &h, a, b));
    ensure(p.feasible && costs_equal(p.cost.value(), f.cost.value()), || {
        format!("cost {} vs flat {}", p.cost, f.cost)
    })?;
    let ratio = flat.as_secs_f64() / online.as_secs_f64();
    ensure(ratio >= 5.0, || format!("online {online:?}, flat {flat:?}, ratio {ratio:.1}"))?;
    Ok(format!("cost {} equals flat; online {:.3}ms flat {:.1}ms ({ratio:.0}x)", p.cost, ms(online), ms(flat)))
}

/// Replay and streaming checks for every query of one instance.
fn check_expansion(
    name: &str,
    h: &Hierarchy,
    table: &ExitCostTable,
    pairs: &[(NodeId, NodeId)],
) -> Result<usize, String> {
    let mut plans = 0;
    for &(a, b) in pairs {
        let p = plan(h, table, a, b).map_err(|e| e.to_string())?;
        if !p.feasible {
            continue;
        }
        let run = h.run_plan(a, &p.plan);
        ensure(run.end == Some(b) && run.cost == p.cost, || {
            format!("{name}: replay of {a:?} -> {b:?} gives {:?} at {}, solver {}", run.end, run.cost, p.cost)
        })?;
        let streamed: Vec<_> = PlanStream::new(h, table, &p.reduced).collect();
        ensure(streamed == p.plan, || format!("{name}: streamed plan differs for {a:?} -> {b:?}"))?;
        plans += 1;
    }
    Ok(plans)
}

fn expansion_contracts() -> Outcome {
    let mut plans = 0;
    for i in 0..200 {
        let h = gen_random(&random_params(i)).map_err(|e| e.to_string())?;
        let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
        plans += check_expansion(&format!("random {i}"), &h, &table, &random_pairs(&h, i, 8))?;
    }
    for d in 1..=12 {
        let h = gen_recursive(d).map_err(|e| e.to_string())?;
        let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
        let (a, b) = opposite_states(&h);
        let mut pairs = vec![(a, b), (b, a)];
        pairs.extend(random_pairs(&h, d as u64, 8));
        plans += check_expansion(&format!("recursive {d}"), &h, &table, &pairs)?;
    }
    let h = fig2_fixture();
    let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
    let leaves: Vec<NodeId> = h.leaves().collect();
    let pairs: Vec<_> = leaves.iter().flat_map(|&a| leaves.iter().map(move |&b| (a, b))).collect();
    plans += check_expansion("fixture", &h, &table, &pairs)?;
    let params = WarehouseParams::default();
    let h = gen_warehouse(&params).map_err(|e| e.to_string())?;
    let table = compute_exit_tables(&h).map_err(|e| e.to_string())?;
    let (a, b) = warehouse_query(&params);
    let mut pairs = vec![(h.resolve(&a).unwrap(), h.resolve(&b).unwrap())];
    pairs.extend(random_pairs(&h, 7, 20));
    plans += check_expansion("warehouse", &h, &table, &pairs)?;
    Ok(format!("{plans} feasible plans replay exactly and stream identically"))
}

fn round_trip(name: &str, h: &Hierarchy) -> Result<(), String> {
    let text = serialize_himm(h);
    let back = parse_himm(&text).map_err(|e| format!("{name}: {e}"))?;
    ensure(&back == h, || format!("{name}: hierarchy differs after round trip"))?;
    let table = compute_exit_tables(h).map_err(|e| e.to_string())?;
    let cache = save_cache(&table, h);
    let loaded = load_cache(&cache, &back).map_err(|e| format!("{name}: {e}"))?;
    ensure(loaded == table, || format!("{name}: exit table differs after round trip"))
}

fn io_round_trips() -> Outcome {
    let mut count = 0;
    for d in 1..=10 {
        round_trip(&format!("recursive {d}"), &gen_recursive(d).map_err(|e| e.to_string())?)?;
        count += 1;
    }
    for i in 0..30 {
        round_trip(&format!("random {i}"), &gen_random(&random_params(i)).map_err(|e| e.to_string())?)?;
        count += 1;
    }
    round_trip("fixture", &fig2_fixture())?;
    let small = WarehouseParams { houses: 2, grid: 3, rack: 2, ..Default::default() };
    round_trip("small warehouse", &gen_warehouse(&small).map_err(|e| e.to_string())?)?;
    let wh = gen_warehouse(&WarehouseParams::default()).map_err(|e| e.to_string())?;
    round_trip("warehouse", &wh)?;
    count += 3;

    let h = fig2_fixture();
    let cache = save_cache(&compute_exit_tables(&h).map_err(|e| e.to_string())?, &h);
    let edited = h.map_costs(|c| c * 2.0);
    ensure(load_cache(&cache, &edited).is_err(), || "cache accepted for an edited hierarchy".into())?;
    Ok(format!("{count} instances round-trip; stale cache rejected"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("exit-cost correctness", exit_cost_correctness),
        ("fixture facts", fixture_facts),
        ("recursive family structure", recursive_structure),
        ("recursive family performance", recursive_performance),
        ("offline linearity", offline_linearity),
        ("warehouse", warehouse),
        ("expansion contracts", expansion_contracts),
        ("I/O round trips", io_round_trips),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("[AC-{}] PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[AC-{}] FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
