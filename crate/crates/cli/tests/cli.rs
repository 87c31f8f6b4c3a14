use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sbr_core::baselines::{greedy, worst_case_budget};
use sbr_core::experiment::{evaluate, solve, Algorithm, Instance, SolveParams};
use sbr_core::ItemSet;
use tempfile::tempdir;

fn sbr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbr")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sbr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in {report}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generated_instance_round_trips_and_solve_matches_library() {
    let dir = tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    let strat = dir.path().join("strat.txt");
    ok(&["gen", "--domain", "budget", "--n", "12", "--seed", "4", "--out", p(&inst)]);
    let text = fs::read_to_string(&inst).unwrap();
    let instance = Instance::from_text(&text).unwrap();
    assert_eq!(instance.to_text(), text);

    let report = ok(&["solve", p(&inst), "--seed", "9", "--out", p(&strat)]);
    let strategy = solve(&instance, Algorithm::Equator, &SolveParams::default(), 9, None).unwrap();
    let expected = evaluate(&instance, &strategy, 10_000).unwrap();
    assert_eq!(field(&report, "value").parse::<f64>().unwrap(), expected.value);
    assert_eq!(field(&report, "exact"), "true");

    let evaluated = ok(&["eval", p(&inst), p(&strat)]);
    assert_eq!(field(&evaluated, "value"), field(&report, "value"));
}

#[test]
fn greedy_subcommand_agrees_with_plain_greedy() {
    let dir = tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    ok(&["gen", "--domain", "budget", "--n", "10", "--seed", "2", "--out", p(&inst)]);
    let Instance::Budget(game) = Instance::from_text(&fs::read_to_string(&inst).unwrap()).unwrap() else {
        panic!("expected a budget instance");
    };
    let set: ItemSet = greedy(&game.instance.nominal_objective(), &game.instance.matroid());
    let strategy = sbr_core::MixedStrategy::pure(set);
    let expected = worst_case_budget(&game, &strategy).unwrap().value;
    let report = ok(&["solve", p(&inst), "--algorithm", "greedy"]);
    assert_eq!(field(&report, "value").parse::<f64>().unwrap(), expected);
}

#[test]
fn nsg_solve_and_eval_agree() {
    let dir = tempdir().unwrap();
    let inst = dir.path().join("g.txt");
    let strat = dir.path().join("s.txt");
    ok(&["gen", "--domain", "nsg", "--n", "16", "--density", "0.3", "--k", "2", "--seed", "3", "--out", p(&inst)]);
    assert!(fs::read_to_string(&inst).unwrap().starts_with("nsg 16 "));
    let report = ok(&["solve", p(&inst), "-K", "20", "-c", "5", "--out", p(&strat)]);
    let evaluated = ok(&["eval", p(&inst), p(&strat)]);
    assert_eq!(field(&evaluated, "value"), field(&report, "value"));
}

#[test]
fn experiment_csv_is_deterministic_without_timing() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "# small run\ndomain = budget\nalgorithm = equator\nn = 8\ntrials = 2\nseed = 5\ntiming = off\nK = 5\nc = 3\n",
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["exp", p(&cfg), "--out", p(&a)]);
    ok(&["exp", p(&cfg), "--out", p(&b)]);
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("domain,algorithm,n,trial,seed,value,runtime_ms,status"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("budget,equator,8,0,5,"));
    assert!(rows[1].starts_with("budget,equator,8,1,6,"));
    assert!(rows[2].starts_with("budget,equator,8,mean,"));

    let other = ok(&["exp", p(&cfg), "--seed", "6"]);
    assert_ne!(other, csv);
}

#[test]
fn ingest_builds_a_budget_instance() {
    let dir = tempdir().unwrap();
    let bids = dir.path().join("bids.txt");
    fs::write(&bids, "shoes alice 0.2 3\nshoes bob 0.1\nboots bob 0.4 2\nhats carol 0.3\n").unwrap();
    let text = ok(&["ingest", p(&bids), "--budget", "2"]);
    assert!(text.starts_with("budget 3 3 2 "));
    Instance::from_text(&text).unwrap();
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(sbr(&["solve"]).status.code(), Some(2));
    assert_eq!(sbr(&["gen", "--domain", "chess", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn bad_config_and_missing_files_are_reported() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "domain = budget\nalgorithm = equator\nn = 8\ntrials = zero\n").unwrap();
    let out = sbr(&["exp", p(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));

    let out = sbr(&["eval", "/nonexistent/inst", "/nonexistent/strat"]);
    assert_eq!(out.status.code(), Some(1));
}
