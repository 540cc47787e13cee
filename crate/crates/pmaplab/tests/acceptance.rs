//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! A1  exact parent-code bijection and Cayley identity, n = 2..=5
//! A2  exact law identity: cyclic points vs 1 + sampled height, n = 3..=5
//! A3  exact pathwise coupling identity on 1000 random instances at n = 50
//! A4  Joyal pushforward law, TV <= 0.01 over 1e6 draws
//! A5  scaled cyclic counts vs first cutpoint, KS <= 0.05
//! A6  scaled root distance vs first stick-breaking branch, KS <= 0.05
//! A7  first-basin mass three ways, pairwise KS <= 0.06
//! A8  randomized invariant battery, 1000 instances per property

use pmaplab::experiment::{run_experiment, ExperimentConfig, ExperimentId};
use pmaplab::stats::tv_finite;
use pmaplab::suites;

const SEED: u64 = 20260809;

fn verdict(tag: &str, detail: String, pass: bool) {
    println!(
        "[{tag}] {detail} ... {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{tag} failed: {detail}");
}

#[test]
fn a1_bijection_and_cayley() {
    let report = suites::check_bijection().expect("suite runs");
    let worst_gap = report
        .checks
        .iter()
        .filter(|c| c.name.starts_with("cayley_gap"))
        .map(|c| c.value)
        .fold(0.0f64, f64::max);
    verdict(
        "A1",
        format!(
            "all parent codes decode to distinct trees with matching child counts, \
             max |Cayley sum - 1| = {worst_gap:.2e} (tol 1e-10)"
        ),
        report.pass() && worst_gap <= 1e-10,
    );
}

#[test]
fn a2_cyclic_points_identity() {
    let mut worst = 0.0f64;
    for n in 3..=5usize {
        let p = pmaplab::experiment::exact_experiment_p(n);
        let a = pmaplab::experiment::exact_cyclic_count_law(&p).unwrap();
        let b = pmaplab::experiment::exact_one_plus_height_law(&p).unwrap();
        worst = worst.max(tv_finite(&a, &b).unwrap());
    }
    verdict(
        "A2",
        format!("law of |C(M)| equals law of 1 + ht(p-sample), max TV = {worst:.2e} (tol 1e-10)"),
        worst <= 1e-10,
    );
}

#[test]
fn a3_pathwise_coupling_identity() {
    let report = suites::check_lemj(SEED, 1000, 50).expect("suite runs");
    let failures = report.checks[0].value;
    verdict(
        "A3",
        format!("tilde functional equals coupled mapping walk minus 1 on 1000 instances at n = 50; {failures} mismatches"),
        report.pass(),
    );
}

#[test]
fn a4_joyal_pushforward() {
    let tv = suites::joyal_pushforward_tv(SEED, 1_000_000).expect("suite runs");
    verdict(
        "A4",
        format!("empirical Joyal mapping law vs product law, TV = {tv:.4} (tol 0.01)"),
        tv <= 0.01,
    );
}

#[test]
fn a5_cyclic_count_scaling() {
    let mut cfg = ExperimentConfig::new(ExperimentId::E5);
    cfg.n = 10_000;
    cfg.theta = vec![];
    cfg.seed = SEED;
    cfg.replications = 10_000;
    let report = run_experiment(&cfg).expect("experiment runs");
    let ks = report.stat("ks").unwrap();
    verdict(
        "A5",
        format!("sigma * |C(M)| at n = 1e4 vs first cutpoint law, KS = {ks:.4} (tol 0.05)"),
        report.pass,
    );
}

#[test]
fn a6_marginal_convergence() {
    let mut cfg = ExperimentConfig::new(ExperimentId::E6);
    cfg.n = 5000;
    cfg.theta = vec![0.6];
    cfg.seed = SEED;
    cfg.replications = 10_000;
    let report = run_experiment(&cfg).expect("experiment runs");
    let ks = report.stat("ks").unwrap();
    verdict(
        "A6",
        format!(
            "sigma-scaled root distance vs stick-breaking first branch, KS = {ks:.4} (tol 0.05)"
        ),
        report.pass,
    );
}

#[test]
fn a7_basin_masses_and_limit_marks() {
    let mut cfg = ExperimentConfig::new(ExperimentId::E7);
    cfg.n = 3000;
    cfg.theta = vec![0.5];
    cfg.seed = SEED;
    cfg.replications = 5000;
    cfg.grid_log2 = 14;
    cfg.leaves = 2000;
    let report = run_experiment(&cfg).expect("experiment runs");
    let ks = [
        report.stat("ks_discrete_vs_limit").unwrap(),
        report.stat("ks_discrete_vs_junc").unwrap(),
        report.stat("ks_limit_vs_junc").unwrap(),
    ];
    verdict(
        "A7",
        format!(
            "first-basin mass: discrete vs D_1 vs junc, pairwise KS = \
             ({:.4}, {:.4}, {:.4}) (tol 0.06)",
            ks[0], ks[1], ks[2]
        ),
        report.pass,
    );
}

#[test]
fn a8_invariant_suite() {
    let report = suites::check_invariants(SEED, 1000).expect("suite runs");
    let summary: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{}={}", c.name, c.value))
        .collect();
    verdict(
        "A8",
        format!(
            "invariant battery over 1000 instances per property: {}",
            summary.join(", ")
        ),
        report.pass(),
    );
}
