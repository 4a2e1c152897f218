mod common;

use common::{brute_force_optimum, knapsack_dp, small_integer_instance};
use cutrank::bnc::{
    baseline_reports, evaluate_policy, mean_std, metrics_to_csv, solve_mip, solve_with_cuts,
    prepare_root, BncConfig, SolveStatus, METRICS_HEADER,
};
use cutrank::model::{generate_knapsack, generate_set_cover, MipInstance};
use cutrank::scorer::{MlpParams, SelectionPolicy};

fn policies() -> Vec<SelectionPolicy> {
    vec![
        SelectionPolicy::Random(3),
        SelectionPolicy::Violation,
        SelectionPolicy::NormViolation,
        SelectionPolicy::Distance,
        SelectionPolicy::Parallelism,
        SelectionPolicy::CutRanking(MlpParams::glorot(8)),
    ]
}

fn knapsack_data(inst: &MipInstance) -> (Vec<i64>, Vec<i64>, Vec<i64>, i64) {
    let v = inst.objective.iter().map(|c| -c as i64).collect();
    let cap = &inst.constraints[0];
    let w = cap.coeffs.iter().map(|&(_, a)| a as i64).collect();
    let counts = inst.upper.iter().map(|&u| u as i64).collect();
    (v, w, counts, cap.rhs as i64)
}

#[test]
fn twelve_item_knapsacks_match_dp() {
    for seed in 0..15 {
        for max_number in [1, 3] {
            let inst = generate_knapsack(12, max_number, 50, 30, seed).unwrap();
            let (v, w, c, cap) = knapsack_data(&inst);
            let best = knapsack_dp(&v, &w, &c, cap) as f64;
            for cfg in [BncConfig::default().baseline(), BncConfig::default()] {
                let r = solve_mip(&inst, &cfg).unwrap();
                assert_eq!(r.status, SolveStatus::Optimal);
                assert_eq!(r.objective, Some(-best), "seed {seed} count {max_number}");
                assert!(inst.is_feasible(r.x.as_ref().unwrap(), 1e-9));
            }
        }
    }
}

#[test]
fn every_policy_preserves_the_optimum() {
    for seed in 0..100 {
        let inst = small_integer_instance(seed);
        let want = brute_force_optimum(&inst);
        let base = solve_mip(&inst, &BncConfig::default().baseline()).unwrap();
        assert_eq!(base.objective, want, "seed {seed} baseline");
        for p in policies() {
            let cfg = BncConfig::default().with_policy(p.clone());
            let r = solve_mip(&inst, &cfg).unwrap();
            assert_eq!(r.objective, want, "seed {seed} policy {p}");
            assert_eq!(r.objective.is_some(), r.status == SolveStatus::Optimal);
        }
    }
}

#[test]
fn bound_trace_is_monotone() {
    for seed in 0..20 {
        let inst = generate_knapsack(25, 4, 60, 40, seed).unwrap();
        let r = solve_mip(&inst, &BncConfig::default()).unwrap();
        for w in r.bound_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: {} then {}", w[0], w[1]);
        }
        if let Some(obj) = r.objective {
            assert!(r.bound_trace.iter().all(|&b| b <= obj + 1e-9));
        }
    }
}

#[test]
fn deterministic_reports() {
    let inst = generate_knapsack(30, 3, 50, 30, 5).unwrap();
    for p in policies() {
        let cfg = BncConfig::default().with_policy(p);
        assert_eq!(solve_mip(&inst, &cfg).unwrap(), solve_mip(&inst, &cfg).unwrap());
    }
}

#[test]
fn empty_selection_reproduces_the_baseline() {
    let inst = generate_knapsack(20, 3, 50, 30, 9).unwrap();
    let cfg = BncConfig::default();
    let root = prepare_root(&inst, &cfg.cutgen).unwrap();
    let none = solve_with_cuts(&inst, &root, &[], &cfg).unwrap();
    let base = solve_mip(&inst, &cfg.baseline()).unwrap();
    assert_eq!(none.nodes_visited, base.nodes_visited);
    assert_eq!(none.simplex_iterations, base.simplex_iterations);
    assert!(solve_with_cuts(&inst, &root, &[root.pool.len()], &cfg).is_err());
}

#[test]
fn metrics_statistics_replay() {
    let instances: Vec<MipInstance> = (0..8)
        .map(|s| generate_knapsack(20, 3, 50, 30, 100 + s).unwrap())
        .chain((0..4).map(|s| generate_set_cover(30, 40, 0.1, s).unwrap()))
        .collect();
    let cfg = BncConfig::default().with_policy(SelectionPolicy::Random(1));
    let base = baseline_reports(&instances, &cfg).unwrap();
    let m = evaluate_policy(&instances, &cfg, &base).unwrap();
    assert_eq!(m.rows.len(), instances.len());
    assert_eq!(m, evaluate_policy(&instances, &cfg, &base).unwrap());

    // one-pass (Welford) recomputation
    let rn: Vec<f64> = m.rows.iter().filter_map(|r| r.r_nodes).collect();
    let (mut k, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for &x in &rn {
        k += 1.0;
        let d = x - mean;
        mean += d / k;
        m2 += d * (x - mean);
    }
    assert!((mean - m.mean_r_nodes).abs() < 1e-12);
    assert!(((m2 / k).sqrt() - m.std_r_nodes).abs() < 1e-12);
    assert_eq!(mean_std(&rn), (m.mean_r_nodes, m.std_r_nodes));

    let csv = metrics_to_csv(&m.rows);
    assert_eq!(csv.lines().next().unwrap(), METRICS_HEADER);
    assert_eq!(csv.lines().count(), instances.len() + 1);
    for (row, b) in m.rows.iter().zip(&base) {
        let want = (b.nodes_visited as f64 - row.nodes as f64) / b.nodes_visited as f64;
        assert_eq!(row.r_nodes, Some(want));
    }
    let zero = evaluate_policy(&instances, &cfg.baseline(), &base).unwrap();
    assert!(zero.rows.iter().all(|r| r.r_nodes == Some(0.0) && r.r_time == Some(0.0)));
}
