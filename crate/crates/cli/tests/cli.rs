use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn himm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_himm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--output", &path]);
    let o = himm(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn cost_line(o: &Output) -> String {
    stdout(o).lines().find(|l| l.starts_with("cost:")).expect("cost line").to_owned()
}

#[test]
fn validate_accepts_generated_documents() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "r.json", &["recursive", "--depth", "4"]);
    let o = himm(&["validate", "--input", &file]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("15 machines, 31 states, depth 4"));
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "r.json", &["recursive", "--depth", "2"]);
    let text = fs::read_to_string(&file).unwrap().replacen("\"cost\": 1.0", "\"cost\": -1.0", 1);
    fs::write(&file, text).unwrap();
    let o = himm(&["validate", "--input", &file]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("negative cost"));
}

#[test]
fn syntax_errors_fail() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    fs::write(&file, "{ \"version\": ").unwrap();
    let o = himm(&["validate", "--input", file.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn hierarchical_and_flat_modes_agree_on_the_warehouse() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "w.json", &["warehouse"]);
    let cache = dir.path().join("w.cache").to_string_lossy().into_owned();
    let plan_file = dir.path().join("plan.txt").to_string_lossy().into_owned();
    let o = himm(&["offline", "--input", &file, "--cache", &cache]);
    assert!(o.status.success());
    let query = ["--from", "h1/g10_10/t3_3_s3_3", "--to", "h10/g10_10/t3_3_s3_3"];
    let mut args = vec!["plan", "--input", &file, "--cache", &cache, "--emit-plan", &plan_file, "--require-feasible"];
    args.extend_from_slice(&query);
    let h = himm(&args);
    assert!(h.status.success(), "{}", String::from_utf8_lossy(&h.stderr));
    let mut args = vec!["plan", "--input", &file, "--mode", "flat"];
    args.extend_from_slice(&query);
    let f = himm(&args);
    assert!(f.status.success());
    assert_eq!(cost_line(&h), "cost: 953");
    assert_eq!(cost_line(&h), cost_line(&f));
    let plan = fs::read_to_string(&plan_file).unwrap();
    assert!(plan.lines().all(|l| ["left", "right", "up", "down", "scan"].contains(&l)));
    // Nine house moves, nine across the grid, two across the rack.
    assert_eq!(plan.lines().filter(|&l| l == "right").count(), 9 + 9 + 2);
}

#[test]
fn plan_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "r.json", &["recursive", "--depth", "6"]);
    let plan_a = dir.path().join("a.txt").to_string_lossy().into_owned();
    let plan_b = dir.path().join("b.txt").to_string_lossy().into_owned();
    let run = |out: &str| {
        himm(&["plan", "--input", &file, "--from", "3/3/3/3/3/3", "--to", "1/1/1/1/1/1", "--emit-plan", out])
    };
    let (a, b) = (run(&plan_a), run(&plan_b));
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(fs::read_to_string(&plan_a).unwrap(), fs::read_to_string(&plan_b).unwrap());
}

#[test]
fn stale_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.json", &["recursive", "--depth", "3"]);
    let b = gen(dir.path(), "b.json", &["recursive", "--depth", "4"]);
    let cache = dir.path().join("a.cache").to_string_lossy().into_owned();
    assert!(himm(&["offline", "--input", &a, "--cache", &cache]).status.success());
    let o = himm(&["plan", "--input", &b, "--cache", &cache, "--from", "1/1/1/1", "--to", "3/3/3/3"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("stale cache"));
}

#[test]
fn flat_mode_respects_the_limit() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "r.json", &["recursive", "--depth", "5"]);
    let o = himm(&[
        "plan",
        "--input",
        &file,
        "--mode",
        "flat",
        "--flat-limit",
        "10",
        "--from",
        "1/1/1/1/1",
        "--to",
        "3/3/3/3/3",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("flat mode refused"));
}

#[test]
fn unknown_states_and_refined_nodes_fail() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen(dir.path(), "r.json", &["recursive", "--depth", "2"]);
    assert!(!himm(&["plan", "--input", &file, "--from", "1/9", "--to", "2"]).status.success());
    assert!(!himm(&["plan", "--input", &file, "--from", "1", "--to", "2"]).status.success());
}

#[test]
fn bench_writes_equal_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv").to_string_lossy().into_owned();
    let o = himm(&["bench", "--min-depth", "1", "--depth", "6", "--repetitions", "2", "--csv", &csv]);
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,depth,states,offline_s,online_s,flat_s,h_cost,f_cost,equal"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn bench_gated_rows_leave_flat_columns_empty() {
    let o = himm(&["bench", "--min-depth", "3", "--depth", "3", "--flat-limit", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("recursive-3,3,15,"));
    assert!(row.ends_with(",,"), "{row}");
}
