use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use himm::bench::{run_depth, write_csv, SweepConfig};
use himm::flat::{flat_plan, flatten};
use himm::generators::{gen_random, gen_recursive, gen_warehouse, RandomParams, WarehouseParams};
use himm::io::{format_plan, load_cache, parse_himm, save_cache, serialize_himm, IoError};
use himm::{compute_exit_tables, ExitCostTable, Hierarchy, NodeId, Parallelism};

#[derive(Parser)]
#[command(name = "himm", version, about = "Optimal planning in hierarchical Mealy machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a hierarchy document and report every violated rule.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compute the exit-cost table and write it as a cache document.
    Offline {
        #[arg(long)]
        input: PathBuf,
        /// Cache file to write.
        #[arg(long, alias = "output")]
        cache: PathBuf,
    },
    /// Plan between two states, given as slash-separated paths.
    Plan(PlanArgs),
    /// Write a generated hierarchy document.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; standard output when omitted.
        #[arg(long, global = true)]
        output: Option<PathBuf>,
    },
    /// Depth sweep over the recursive family, one CSV row per run.
    Bench {
        #[arg(long, default_value_t = 1)]
        min_depth: usize,
        /// Largest depth to run.
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        /// CSV output file; standard output when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Skip the flat baseline above this many states.
        #[arg(long, default_value_t = 4_000_000)]
        flat_limit: usize,
        /// Compute exit tables on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Hierarchical,
    Flat,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// Exit-cost cache. Loaded when present, otherwise computed and written.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Hierarchical)]
    mode: Mode,
    /// Write the plan to this file, one input per line.
    #[arg(long)]
    emit_plan: Option<PathBuf>,
    /// Print timings and search sizes.
    #[arg(long)]
    stats: bool,
    /// Refuse flat mode above this many states.
    #[arg(long, default_value_t = 4_000_000)]
    flat_limit: usize,
    /// Exit with failure when no plan exists.
    #[arg(long)]
    require_feasible: bool,
}

#[derive(Subcommand)]
enum GenKind {
    /// Self-similar family with 2^(d+1) - 1 states.
    Recursive {
        #[arg(long)]
        depth: usize,
    },
    /// Houses, grids and test-tube racks.
    Warehouse {
        #[arg(long, default_value_t = 10)]
        houses: usize,
        #[arg(long, default_value_t = 10)]
        grid: usize,
        #[arg(long, default_value_t = 3)]
        rack: usize,
    },
    /// Seeded random hierarchy.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 3)]
        inputs: usize,
        #[arg(long, default_value_t = 0.6)]
        density: f64,
    },
}

fn read_hierarchy(path: &Path) -> Result<Hierarchy> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_himm(&text).with_context(|| format!("loading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().lock().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn resolve(h: &Hierarchy, path: &str) -> Result<NodeId> {
    let gs = path.parse().map_err(|e| anyhow::anyhow!("{e}")).with_context(|| format!("bad state path `{path}`"))?;
    let node = h.resolve(&gs).with_context(|| format!("resolving `{path}`"))?;
    if !h.is_state(node) {
        bail!("`{path}` names a refined node, not a state");
    }
    Ok(node)
}

fn cmd_validate(input: &Path) -> Result<bool> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    match parse_himm(&text) {
        Ok(h) => {
            let s = h.stats();
            println!("valid: {} machines, {} states, depth {}", s.machines, s.states, s.depth);
            Ok(true)
        }
        Err(IoError::Invalid(report)) => {
            for v in &report.violations {
                println!("{v}");
            }
            println!("invalid: {} violation(s)", report.violations.len());
            Ok(false)
        }
        Err(e) => bail!("{}: {e}", input.display()),
    }
}

fn cmd_offline(input: &Path, cache: &Path) -> Result<()> {
    let h = read_hierarchy(input)?;
    let t = Instant::now();
    let table = compute_exit_tables(&h)?;
    let elapsed = t.elapsed();
    fs::write(cache, save_cache(&table, &h)).with_context(|| format!("writing {}", cache.display()))?;
    println!(
        "exit costs for {} machines x {} inputs in {:.6}s",
        table.machine_count(),
        table.input_count(),
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn obtain_table(h: &Hierarchy, cache: Option<&Path>) -> Result<(ExitCostTable, Option<f64>)> {
    if let Some(path) = cache {
        if path.exists() {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok((load_cache(&text, h).with_context(|| format!("loading {}", path.display()))?, None));
        }
    }
    let t = Instant::now();
    let table = compute_exit_tables(h)?;
    let offline = t.elapsed().as_secs_f64();
    if let Some(path) = cache {
        fs::write(path, save_cache(&table, h)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok((table, Some(offline)))
}

fn cmd_plan(a: &PlanArgs) -> Result<bool> {
    let h = read_hierarchy(&a.input)?;
    let (from, to) = (resolve(&h, &a.from)?, resolve(&h, &a.to)?);
    let (feasible, cost, plan) = match a.mode {
        Mode::Hierarchical => {
            let (table, offline) = obtain_table(&h, a.cache.as_deref())?;
            let t = Instant::now();
            let p = himm::plan(&h, &table, from, to)?;
            let online = t.elapsed().as_secs_f64();
            if a.stats {
                match offline {
                    Some(s) => println!("offline_s: {s:.6}"),
                    None => println!("offline_s: cached"),
                }
                println!("online_s: {online:.6}");
                println!("reduce_s: {:.6}", p.stats.reduce_time.as_secs_f64());
                println!("search_s: {:.6}", p.stats.search_time.as_secs_f64());
                println!("expand_s: {:.6}", p.stats.expand_time.as_secs_f64());
                println!(
                    "graph: {} vertices, {} arcs, {} searches",
                    p.stats.g_vertices, p.stats.g_arcs, p.stats.searches
                );
            }
            (p.feasible, p.cost, p.plan)
        }
        Mode::Flat => {
            let states = h.stats().states;
            if states > a.flat_limit {
                bail!("flat mode refused: {states} states exceed the limit of {}", a.flat_limit);
            }
            let t = Instant::now();
            let fm = flatten(&h);
            let built = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let f = flat_plan(&fm, &h, from, to);
            let search = t.elapsed().as_secs_f64();
            if a.stats {
                println!("flatten_s: {built:.6}");
                println!("flat_s: {search:.6}");
                println!("states: {states}");
            }
            (f.feasible, f.cost, f.plan)
        }
    };
    if feasible {
        println!("cost: {cost}");
        println!("steps: {}", plan.len());
        if let Some(path) = &a.emit_plan {
            fs::write(path, format_plan(&h, &plan)).with_context(|| format!("writing {}", path.display()))?;
        }
    } else {
        println!("infeasible");
    }
    Ok(feasible || !a.require_feasible)
}

fn cmd_gen(kind: &GenKind, output: Option<&Path>) -> Result<()> {
    let h = match *kind {
        GenKind::Recursive { depth } => gen_recursive(depth)?,
        GenKind::Warehouse { houses, grid, rack } => {
            gen_warehouse(&WarehouseParams { houses, grid, rack, ..Default::default() })?
        }
        GenKind::Random { seed, depth, states, inputs, density } => gen_random(&RandomParams {
            seed,
            max_depth: depth,
            max_states: states,
            inputs,
            density,
            ..Default::default()
        })?,
    };
    write_output(output, &serialize_himm(&h))
}

fn cmd_bench(min: usize, max: usize, cfg: &SweepConfig, csv: Option<&Path>) -> Result<bool> {
    if min == 0 || min > max {
        bail!("depth range {min}..={max} is empty or starts at 0");
    }
    let mut rows = Vec::new();
    for d in min..=max {
        let r = run_depth(d, cfg)?;
        for row in &r {
            eprintln!(
                "depth {d}: offline {:.6}s online {:.6}s flat {} equal {}",
                row.offline_s,
                row.online_s,
                row.flat_s.map_or("skipped".into(), |s| format!("{s:.6}s")),
                row.equal.map_or("n/a".into(), |e| e.to_string())
            );
        }
        rows.extend(r);
    }
    let mut out = Vec::new();
    write_csv(&rows, &mut out)?;
    write_output(csv, std::str::from_utf8(&out)?)?;
    let unequal = rows.iter().filter(|r| r.equal == Some(false)).count();
    if unequal > 0 {
        eprintln!("{unequal} row(s) disagree with the flat baseline");
    }
    Ok(unequal == 0)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate { input } => cmd_validate(&input),
        Command::Offline { input, cache } => cmd_offline(&input, &cache).map(|_| true),
        Command::Plan(args) => cmd_plan(&args),
        Command::Gen { kind, output } => cmd_gen(&kind, output.as_deref()).map(|_| true),
        Command::Bench { min_depth, depth, repetitions, csv, flat_limit, sequential } => {
            let parallelism = if sequential { Parallelism::Sequential } else { Parallelism::default() };
            let cfg = SweepConfig { repetitions: repetitions.max(1), flat_limit, parallelism };
            cmd_bench(min_depth, depth, &cfg, csv.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
