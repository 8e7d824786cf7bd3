//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! `cargo test -p ibp-bench --test acceptance`

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{optimal_cost, random_pd, random_psd, rel_close, rng, small_instance};
use ibp_bench::{run_bench, BenchConfig, ScenarioSource, Status};
use ibp_core::bounding::{
    bounding_sim_all, lower_bound_remaining, upper_bound_remaining, BoundingSim, CoverKind,
};
use ibp_core::model::{make_random_scenario, make_tracking_scenario, CostFn, Scenario};
use ibp_core::psd::{psd_compare, SymMatrix, DEFAULT_RIDGE};
use ibp_core::riccati::{riccati_step, stage_cost, total_cost, Action, Schedule};
use ibp_core::search::{
    branch_and_bound, exhaustive_search, greedy_search, ibp_search, BranchConfig, BudgetConstraint, LowerBound,
    SearchOptions, Strategy,
};
use nalgebra::DMatrix;
use rand::Rng;

const REL: f64 = 1e-9;
const INSTANCES: u64 = 50;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn instances() -> Vec<Scenario> {
    (0..INSTANCES).map(small_instance).collect()
}

fn full_tree(sensors: u64, horizon: usize) -> u64 {
    (0..=horizon as u32).map(|i| sensors.pow(i)).sum()
}

fn optimality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0f64;
    let mut failures = Vec::new();
    for (seed, s) in instances().iter().enumerate() {
        let oracle = exhaustive_search(s, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let ibp = ibp_search(s, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let reference = optimal_cost(s);
        let err = (ibp.cost.total - oracle.cost.total).abs() / oracle.cost.total.abs().max(1.0);
        worst = worst.max(err);
        if !rel_close(ibp.cost.total, oracle.cost.total, REL) || !rel_close(oracle.cost.total, reference, REL) {
            failures.push(seed);
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "IBP = exhaustive on {INSTANCES} instances, max rel err {worst:.1e}, {:.2} s, mismatches {failures:?}",
            elapsed.as_secs_f64()
        ),
    )
}

fn agreement() -> Outcome {
    let mut failures = Vec::new();
    for (seed, s) in instances().iter().enumerate() {
        let oracle = exhaustive_search(s, &SearchOptions::default()).map_err(|e| e.to_string())?;
        for strategy in [Strategy::Zb, Strategy::Cov, Strategy::Sip, Strategy::Ibp] {
            let res = strategy.run(s, &SearchOptions::default()).map_err(|e| e.to_string())?;
            if !rel_close(res.cost.total, oracle.cost.total, REL) {
                failures.push((seed, strategy));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("ZB, COV, SIP, IBP match exhaustive on {INSTANCES} instances, mismatches {failures:?}"),
    )
}

fn chain_holds(s: &Scenario) -> Result<(bool, [u64; 3]), String> {
    let run = |st: Strategy| st.run(s, &SearchOptions::default()).map(|r| r.expanded_nodes).map_err(|e| e.to_string());
    let (ibp, sip, zb) = (run(Strategy::Ibp)?, run(Strategy::Sip)?, run(Strategy::Zb)?);
    Ok((ibp <= sip && sip <= zb, [ibp, sip, zb]))
}

fn pruning_chain() -> Outcome {
    let mut failures = Vec::new();
    for (seed, s) in instances().iter().enumerate() {
        if !chain_holds(s)?.0 {
            failures.push(format!("random {seed}"));
        }
    }
    let mut tracking = Vec::new();
    for n in 1..=6 {
        for seed in 0..10 {
            let s = make_tracking_scenario(1.0, 0.02, n, seed).map_err(|e| e.to_string())?;
            let (ok, nodes) = chain_holds(&s)?;
            if !ok {
                failures.push(format!("tracking N={n} seed={seed}"));
            }
            if seed == 0 {
                tracking.push(format!("N={n}:{}/{}/{}", nodes[0], nodes[1], nodes[2]));
            }
        }
    }
    check(
        failures.is_empty(),
        format!(
            "IBP <= SIP <= ZB on {INSTANCES} random + 60 tracking instances (seed 0 IBP/SIP/ZB {}), violations {failures:?}",
            tracking.join(" ")
        ),
    )
}

fn scalar_greedy() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut failures = Vec::new();
    for seed in 0..100 {
        let (sensors, horizon) = (r.random_range(1..=5), r.random_range(1..=8));
        let s = make_random_scenario(1, sensors, horizon, seed).map_err(|e| e.to_string())?;
        let greedy = greedy_search(&s, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let ibp = ibp_search(&s, &SearchOptions::default()).map_err(|e| e.to_string())?;
        if !rel_close(greedy.cost.total, ibp.cost.total, REL) {
            failures.push(seed);
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "greedy = IBP on 100 scalar instances, {:.2} s, mismatches {failures:?}",
            elapsed.as_secs_f64()
        ),
    )
}

fn theorem_one() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut r = rng(5);
    let mut violations = [0usize; 3];
    for trial in 0..500 {
        let small = random_pd(&mut r, 4);
        let large = &small + &random_psd(&mut r, 4, 1 + trial % 4);
        let m = random_psd(&mut r, 4, 1 + trial % 3);
        let a = common::random_matrix(&mut r, 4, 4);
        let q = random_pd(&mut r, 4);
        let lo = riccati_step(&small, &m, &a, &q).map_err(|e| e.to_string())?;
        let hi = riccati_step(&large, &m, &a, &q).map_err(|e| e.to_string())?;
        if !psd_compare(&lo, &hi, TOL).map_err(|e| e.to_string())?.is_le() {
            violations[0] += 1;
        }
    }
    for _ in 0..500 {
        let small = random_pd(&mut r, 4);
        let large = &small + &random_psd(&mut r, 4, 2);
        let w = random_psd(&mut r, 4, 4);
        for g in [CostFn::Trace, CostFn::Determinant, CostFn::MaxEigenvalue] {
            let (lo, hi) = (stage_cost(&small, &w, g), stage_cost(&large, &w, g));
            if hi < lo - TOL * hi.abs().max(1.0) {
                violations[1] += 1;
            }
        }
    }
    for _ in 0..500 {
        let small = random_pd(&mut r, 4);
        let large = &small + &random_psd(&mut r, 4, 3);
        let w: DMatrix<f64> = common::random_matrix(&mut r, 4, 4);
        let ord = psd_compare(&small.congruence(&w), &large.congruence(&w), TOL).map_err(|e| e.to_string())?;
        if !ord.is_le() {
            violations[2] += 1;
        }
    }
    check(
        violations == [0, 0, 0],
        format!(
            "violations: monotonicity {}, cost ordering {}, symmetric weighting {} (500 trials each)",
            violations[0], violations[1], violations[2]
        ),
    )
}

fn corollary_one() -> Outcome {
    let unfiltered = BranchConfig {
        bound: LowerBound::BoundingSensor,
        dominance: false,
    };
    let mut failures = Vec::new();
    let mut changed = 0;
    for (seed, s) in instances().iter().enumerate() {
        let with = ibp_search(s, &SearchOptions::default()).map_err(|e| e.to_string())?;
        let without = branch_and_bound(s, &SearchOptions::default(), unfiltered, |_| {}).map_err(|e| e.to_string())?;
        if !rel_close(with.cost.total, without.cost.total, REL) {
            failures.push(seed);
        }
        if with.expanded_nodes != without.expanded_nodes {
            changed += 1;
        }
    }
    check(
        failures.is_empty(),
        format!("filter on/off gives the same cost on {INSTANCES} instances ({changed} with different node counts), mismatches {failures:?}"),
    )
}

fn bounding_contract() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..50 {
        let s = make_tracking_scenario(1.0, 0.02, 1, seed).map_err(|e| e.to_string())?;
        let sims: Vec<SymMatrix> = (1..=8).map(|id| s.sim(id, 0).map(|m| m.m)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let top = bounding_sim_all(&sims, CoverKind::MaxCover, DEFAULT_RIDGE).map_err(|e| e.to_string())?;
        let bottom = bounding_sim_all(&sims, CoverKind::MinCover, DEFAULT_RIDGE).map_err(|e| e.to_string())?;
        for (i, m) in sims.iter().enumerate() {
            let up = psd_compare(&top, m, 1e-8).map_err(|e| e.to_string())?.is_ge();
            let down = psd_compare(&bottom, m, 1e-8).map_err(|e| e.to_string())?.is_le();
            if !up || !down {
                failures.push((seed, i + 1));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("max cover dominates and min cover is dominated by all 8 SIMs for 50 seeds, failures {failures:?}"),
    )
}

fn admissibility() -> Outcome {
    let mut nodes = 0;
    let mut violations = Vec::new();
    for (seed, s) in instances().iter().enumerate() {
        let lower = BoundingSim::for_scenario(s, CoverKind::MaxCover, DEFAULT_RIDGE).map_err(|e| e.to_string())?;
        let upper = BoundingSim::for_scenario(s, CoverKind::MinCover, DEFAULT_RIDGE).map_err(|e| e.to_string())?;
        let mut errors = Vec::new();
        branch_and_bound(s, &SearchOptions::default(), BranchConfig::IBP, |v| {
            nodes += 1;
            let k = v.depth();
            let best = common::best_completion(s, v.covariance.as_matrix(), k);
            let lb = lower_bound_remaining(v.covariance, k, s, &lower);
            let ub = upper_bound_remaining(v.covariance, k, s, &upper);
            match (lb, ub) {
                (Ok(lb), Ok(ub)) => {
                    let slack = REL * (v.known_cost + best).max(1.0);
                    if v.known_cost + lb > v.known_cost + best + slack || ub < best - slack {
                        violations.push((seed, v.prefix().to_string()));
                    }
                }
                (Err(e), _) | (_, Err(e)) => errors.push(e.to_string()),
            }
        })
        .map_err(|e| e.to_string())?;
        if let Some(e) = errors.pop() {
            return Err(e);
        }
    }
    check(
        violations.is_empty(),
        format!("known + LB <= best completion <= UB at all {nodes} IBP nodes, violations {violations:?}"),
    )
}

fn hand_instance() -> Outcome {
    let one = || DMatrix::from_element(1, 1, 1.0);
    let s = Scenario::time_invariant(
        one(),
        SymMatrix::scalar(1.0),
        vec![(one(), SymMatrix::scalar(0.5)), (one(), SymMatrix::scalar(1.0))],
        SymMatrix::scalar(1.0),
        SymMatrix::scalar(1.0),
        CostFn::Trace,
        2,
    )
    .map_err(|e| e.to_string())?;
    let res = ibp_search(&s, &SearchOptions::default()).map_err(|e| e.to_string())?;
    let err = (res.cost.total - 89.0 / 33.0).abs();
    check(
        res.schedule == Schedule::from_ids(&[1, 1]) && err <= 1e-12,
        format!("schedule {} cost {} (|err| {err:.1e})", res.schedule, res.cost.total),
    )
}

fn tracking_bench() -> Outcome {
    let config = BenchConfig {
        horizons: (1..=6).collect(),
        runs: 10,
        base_seed: 2024,
        strategies: vec![Strategy::Greedy, Strategy::Zb, Strategy::Cov, Strategy::Sip, Strategy::Ibp],
        scenario: ScenarioSource::Tracking { period: 1.0, q: 0.02 },
        output: None,
        node_limit: None,
        subset_size: 1,
        measurement_budget: None,
    };
    let start = Instant::now();
    let report = run_bench(&config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut problems = Vec::new();
    let mut means = Vec::new();
    for row in report.summary.iter().filter(|r| r.strategy == Strategy::Ibp) {
        let mean = row.mean_expanded_nodes.unwrap_or(f64::INFINITY);
        means.push(format!("N={}:{mean}", row.horizon));
        if row.runs_ok != row.runs || (row.horizon >= 2 && mean >= full_tree(8, row.horizon) as f64) {
            problems.push(row.horizon);
        }
    }
    if report.records.iter().any(|r| r.status != Status::Ok) {
        problems.push(0);
    }
    check(
        problems.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "N=1..6, M=10 in {:.1} s; IBP mean expanded {}; failing N {problems:?}",
            elapsed.as_secs_f64(),
            means.join(" ")
        ),
    )
}

fn budget() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for seed in 0..30 {
        let mut r = rng(600 + seed);
        let (sensors, horizon) = (r.random_range(1..=4), r.random_range(1..=5));
        let s = make_random_scenario(r.random_range(1..=4), sensors, horizon, seed).map_err(|e| e.to_string())?;
        for k in 0..=horizon as u64 {
            let opts = SearchOptions {
                virtual_sensor: true,
                budget: Some(BudgetConstraint::max_measurements(k, horizon, sensors)),
                ..Default::default()
            };
            let predicted = total_cost(&s, &Schedule(vec![Action::none(); horizon])).map_err(|e| e.to_string())?;
            for strategy in Strategy::ALL {
                runs += 1;
                let res = strategy.run(&s, &opts).map_err(|e| e.to_string())?;
                let used: usize = res.schedule.steps().iter().map(|a| a.ids().len()).sum();
                if used as u64 > k || !opts.budget.as_ref().unwrap().is_satisfied(&res.schedule) {
                    failures.push(format!("seed {seed} K={k} {strategy}: {} measurements", used));
                }
                if k == 0 && (res.cost.total - predicted.total).abs() > 1e-12 {
                    failures.push(format!("seed {seed} K=0 {strategy}: {} vs {}", res.cost.total, predicted.total));
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{runs} budgeted runs within budget, K=0 equals pure prediction; failures {failures:?}"),
    )
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ibp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

// Drops the elapsed-time column (index 6) from per-run CSV text.
fn without_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(6);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ibp");
    let dir = scratch_dir();
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"horizons":[1,2,3],"runs":3,"base_seed":9,"strategies":["greedy","zb","cov","sip","ibp","exhaustive"],"scenario":{"tracking":{}}}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut csvs = Vec::new();
    let mut verifies = Vec::new();
    for i in 0..2 {
        let out = dir.join(format!("run{i}.csv"));
        let status = Command::new(bin)
            .args(["bench", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        csvs.push(without_elapsed(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?));
        let v = Command::new(bin)
            .args(["verify", "--trials", "20", "--max-S", "3", "--max-N", "4", "--seed", "3"])
            .output()
            .map_err(|e| e.to_string())?;
        verifies.push(v.stdout);
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(
        csvs[0] == csvs[1] && verifies[0] == verifies[1] && !csvs[0].is_empty(),
        format!(
            "bench CSV ({} rows) and verify output identical across two invocations",
            csvs[0].lines().count() - 1
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("optimality", optimality),
        ("optimal-method agreement", agreement),
        ("pruning-power chain", pruning_chain),
        ("scalar greedy optimality", scalar_greedy),
        ("monotonicity properties", theorem_one),
        ("dominance filter soundness", corollary_one),
        ("bounding-sensor contract", bounding_contract),
        ("bound admissibility", admissibility),
        ("hand-derived instance", hand_instance),
        ("tracking scale check", tracking_bench),
        ("budget extension", budget),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1} s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1} s]: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
