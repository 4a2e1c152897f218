//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::{
    brute_force_optimum, dense_rows, feasible_points, feature_oracle, random_lp,
    small_binary_instance, small_integer_instance, vertex_enumeration_min,
};
use cutrank::bnc::{baseline_reports, evaluate_policy, prepare_root, solve_mip, BncConfig};
use cutrank::cutgen::{Cut, CutGenConfig, CutKind};
use cutrank::experiment::{cmd_collect, cmd_evaluate, cmd_generate, cmd_train, ExperimentConfig};
use cutrank::features::{compute_cut_features, FEATURE_NAMES, NUM_FEATURES};
use cutrank::lp::{solve_lp, LpStatus};
use cutrank::model::{generate_knapsack, generate_set_cover, MipInstance, ProblemProperty};
use cutrank::scorer::{MlpParams, SelectionPolicy};
use cutrank::train::{
    assign_labels, collect_active, collect_dataset, collect_random, loss_and_grad, train, Dataset,
    TrainConfig, TrainingSample,
};
use cutrank::features::CutFeatures;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lp_oracle() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..200 {
        let lp = random_lp(seed, 8, 10);
        let sol = solve_lp(&lp);
        if sol.status != LpStatus::Optimal {
            return Err(format!("seed {seed}: status {:?}", sol.status));
        }
        let oracle = vertex_enumeration_min(&lp.objective, &dense_rows(&lp), 1e-9)
            .ok_or_else(|| format!("seed {seed}: oracle found no vertex"))?;
        worst = worst.max((sol.objective_value - oracle).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 30.0, format!("200 LPs, max |diff| {worst:.2e}, {secs:.1}s"))
}

fn cut_validity() -> Outcome {
    let mut cuts = 0;
    let mut kinds = BTreeMap::new();
    let instances = (0..100).map(small_integer_instance).chain((0..100).map(small_binary_instance));
    for inst in instances {
        let root = match prepare_root(&inst, &CutGenConfig::default()) {
            Ok(r) => r,
            Err(cutrank::Error::Infeasible) => continue,
            Err(e) => return Err(format!("{}: {e}", inst.name)),
        };
        let points = feasible_points(&inst);
        for c in &root.pool.cuts {
            cuts += 1;
            *kinds.entry(c.kind.as_str()).or_insert(0) += 1;
            for p in &points {
                if c.activity(p) > c.beta + 1e-7 {
                    return Err(format!("{}: {:?} cut cuts off {p:?}", inst.name, c.kind));
                }
            }
        }
    }
    check(kinds.len() == 3, format!("200 MIPs, {cuts} cuts checked {kinds:?}, none violated"))
}

fn policies(model: &MlpParams, seed: u64) -> Vec<SelectionPolicy> {
    vec![
        SelectionPolicy::Random(seed),
        SelectionPolicy::Violation,
        SelectionPolicy::NormViolation,
        SelectionPolicy::Distance,
        SelectionPolicy::Parallelism,
        SelectionPolicy::CutRanking(model.clone()),
    ]
}

fn solution_preservation() -> Outcome {
    let model = MlpParams::glorot(1);
    let mut solves = 0;
    let instances = (0..100).map(small_integer_instance).chain((0..100).map(small_binary_instance));
    for inst in instances {
        let base = solve_mip(&inst, &BncConfig::default().baseline()).map_err(|e| e.to_string())?;
        if base.objective != brute_force_optimum(&inst) {
            return Err(format!("{}: baseline {:?} disagrees with enumeration", inst.name, base.objective));
        }
        for p in policies(&model, 5) {
            let name = p.name();
            let r = solve_mip(&inst, &BncConfig::default().with_policy(p)).map_err(|e| e.to_string())?;
            solves += 1;
            if r.objective != base.objective {
                return Err(format!("{} {name}: {:?} vs {:?}", inst.name, r.objective, base.objective));
            }
        }
    }
    Ok(format!("{solves} policy solves equal the no-cut optimum"))
}

fn feature_oracle_check() -> Outcome {
    let inst = MipInstance::new("ex", vec![2.0, 4.0, 1.0, 1.0], vec![true; 4]);
    let prop = ProblemProperty {
        x_lp_star: vec![0.75, 0.75, 0.0, 0.0],
        instance: &inst,
    };
    let cut = |alpha, beta| Cut {
        alpha,
        beta,
        kind: CutKind::Gomory,
        source_row: None,
    };
    let f = compute_cut_features(&cut(vec![(0, 1.0), (1, 1.0)], 1.0), &prop);
    let example = f.support == 0.5
        && f.integral_support == 1.0
        && f.coef_mean == 1.0
        && f.obj_mean == 3.0
        && f.norm_violation == 0.5
        && f.distance == 0.5 / 2f64.sqrt()
        && f.parallelism == 6.0 / (22f64.sqrt() * 2f64.sqrt())
        && f.expected_improvement == 22f64.sqrt() * (0.5 / 2f64.sqrt());
    if !example {
        return Err(format!("worked example gave {f:?}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..12);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let integer: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.6)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mut dense = vec![0.0; n];
        let mut alpha = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) || j == n - 1 && alpha.is_empty() {
                dense[j] = rng.gen_range(-4.0..4.0);
                alpha.push((j, dense[j]));
            }
        }
        let beta = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(-6.0..6.0) };
        let inst = MipInstance::new("r", z.clone(), integer.clone());
        let prop = ProblemProperty {
            x_lp_star: x.clone(),
            instance: &inst,
        };
        let got = compute_cut_features(&cut(alpha, beta), &prop).to_array();
        let want = feature_oracle(&dense, beta, &z, &x, &integer);
        for d in 0..NUM_FEATURES {
            let diff = (got[d] - want[d]).abs();
            if diff > 1e-9 {
                return Err(format!("{}: {} vs {}", FEATURE_NAMES[d], got[d], want[d]));
            }
            worst = worst.max(diff);
        }
    }
    Ok(format!("worked example exact, 1000 pairs max |diff| {worst:.2e}"))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for draw in 0..50 {
        let gamma = if draw % 2 == 0 { 0.0 } else { 0.1 };
        let mut p = MlpParams::glorot(1000 + draw);
        for l in &mut p.layers {
            for b in &mut l.b {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        let xs: Vec<[f64; NUM_FEATURES]> =
            (0..6).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
        let ys: Vec<bool> = (0..6).map(|_| rng.gen_bool(0.5)).collect();
        let objective = |p: &MlpParams| {
            let (ce, omega, _) = loss_and_grad(p, &xs, &ys, gamma, 1.0);
            ce + gamma * omega
        };
        let (_, _, g) = loss_and_grad(&p, &xs, &ys, gamma, 1.0);
        let theta = p.flatten();
        for k in 0..theta.len() {
            let mut t = theta.clone();
            t[k] += h;
            p.unflatten(&t);
            let up = objective(&p);
            t[k] -= 2.0 * h;
            p.unflatten(&t);
            let down = objective(&p);
            p.unflatten(&theta);
            let fd = (up - down) / (2.0 * h);
            let scale = fd.abs().max(g[k].abs());
            if scale > 1e-7 {
                worst = worst.max((fd - g[k]).abs() / scale);
            }
        }
    }
    check(worst < 1e-4, format!("50 draws, every parameter, max relative error {worst:.2e}"))
}

fn sample(r: f64) -> TrainingSample {
    TrainingSample {
        bag: vec![0],
        bag_features: CutFeatures::default(),
        r,
        label: None,
        t_base: 1.0,
        t_bag: 1.0,
        greedy: false,
    }
}

fn label_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000 {
        let h = rng.gen_range(1..150);
        let rs: Vec<f64> = (0..h)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { (rng.gen_range(-10..10) as f64) / 7.0 })
            .collect();
        for lambda in [10.0, 50.0, 90.0] {
            let mut s: Vec<_> = rs.iter().copied().map(sample).collect();
            assign_labels(&mut s, lambda);
            let want = ((lambda / 100.0 * h as f64) - 1e-9).ceil() as usize;
            let pos = s.iter().filter(|x| x.label == Some(true)).count();
            if pos != want {
                return Err(format!("trial {trial} h {h} lambda {lambda}: {pos} positives, want {want}"));
            }
        }
    }
    Ok("1000 trials x 3 labelling fractions".into())
}

fn tiny_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
[experiment]
output_dir = "{}"
train_count = 10
test_count = 5
test_seed_start = 1000

[generator]
family = "knapsack"
n_items = 20
max_number = 1
max_value = 30
max_weight = 30

[train]
bags_per_instance = 20
epochs = 50
"#,
        dir.display()
    ))
    .unwrap()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let run = || -> cutrank::Result<(tempfile::TempDir, BTreeMap<String, Vec<u8>>)> {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        cmd_generate(&cfg)?;
        cmd_collect(&cfg, None)?;
        let model = cmd_train(&cfg)?;
        cmd_evaluate(&cfg, &model)?;
        let snap = snapshot(dir.path());
        Ok((dir, snap))
    };
    let (_a, sa) = run().map_err(|e| e.to_string())?;
    let (_b, sb) = run().map_err(|e| e.to_string())?;
    if sa.keys().ne(sb.keys()) {
        return Err("artifact sets differ".into());
    }
    for (k, v) in &sa {
        if v != &sb[k] {
            return Err(format!("{k} differs"));
        }
    }
    let bytes: usize = sa.values().map(Vec::len).sum();
    check(sa.len() > 10, format!("{} artifacts, {bytes} bytes, identical", sa.len()))
}

fn knapsacks(seed_start: u64, count: u64) -> Vec<MipInstance> {
    (0..count)
        .map(|i| generate_knapsack(50 + (i as usize % 6) * 10, 10, 10, 10, seed_start + i).unwrap())
        .collect()
}

/// Two collection rounds, random then epsilon-greedy, retraining after each.
fn learn(train_seed: u64) -> cutrank::Result<MlpParams> {
    let cfg = TrainConfig {
        seed: train_seed,
        ..TrainConfig::default()
    };
    let bnc = BncConfig::default();
    let instances = knapsacks(10_000 * (train_seed + 1), 20);
    let mut data = Dataset::default();
    data.merge_round(collect_dataset(&instances, None, &cfg, &bnc)?, cfg.lambda_percent, cfg.relabel);
    let first = train(&data, &cfg)?.params;
    data.merge_round(
        collect_dataset(&instances, Some(&first), &cfg, &bnc)?,
        cfg.lambda_percent,
        cfg.relabel,
    );
    Ok(train(&data, &cfg)?.params)
}

fn mean_r_nodes(
    instances: &[MipInstance],
    base: &[cutrank::bnc::SolveReport],
    policy: SelectionPolicy,
) -> cutrank::Result<Vec<f64>> {
    let cfg = BncConfig::default().with_policy(policy);
    let m = evaluate_policy(instances, &cfg, base)?;
    Ok(m.rows.iter().filter_map(|r| r.r_nodes).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn learning_signal(models: &mut Vec<MlpParams>) -> Outcome {
    let t = Instant::now();
    let test = knapsacks(100_000, 30);
    let mut base = Vec::new();
    let mut slowest: f64 = 0.0;
    for inst in &test {
        let t = Instant::now();
        base.push(solve_mip(inst, &BncConfig::default().baseline()).map_err(|e| e.to_string())?);
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    let mut cr = Vec::new();
    let mut rnd = Vec::new();
    let mut per_seed = Vec::new();
    for s in 0..3 {
        let model = learn(s).map_err(|e| e.to_string())?;
        let c = mean_r_nodes(&test, &base, SelectionPolicy::CutRanking(model.clone())).map_err(|e| e.to_string())?;
        let r = mean_r_nodes(&test, &base, SelectionPolicy::Random(s)).map_err(|e| e.to_string())?;
        per_seed.push(format!("seed {s}: {:+.3} vs {:+.3}", mean(&c), mean(&r)));
        cr.extend(c);
        rnd.extend(r);
        models.push(model);
    }
    let (mc, mr) = (mean(&cr), mean(&rnd));
    let secs = t.elapsed().as_secs_f64();
    check(
        mc >= mr - 0.02 && slowest < 5.0 && secs < 900.0,
        format!(
            "cut ranking r_nodes {mc:+.3} vs random {mr:+.3} over {} rows [{}], slowest baseline {slowest:.2}s, {secs:.0}s",
            cr.len(),
            per_seed.join("; ")
        ),
    )
}

fn generalization(models: &[MlpParams]) -> Outcome {
    let model = match models.first() {
        Some(m) => m.clone(),
        None => learn(0).map_err(|e| e.to_string())?,
    };
    let test: Vec<MipInstance> = (0..30)
        .map(|i| generate_set_cover(80, 100, 0.1, 300_000 + i).unwrap())
        .collect();
    let base = baseline_reports(&test, &BncConfig::default().baseline()).map_err(|e| e.to_string())?;
    let r = mean_r_nodes(&test, &base, SelectionPolicy::CutRanking(model)).map_err(|e| e.to_string())?;
    let m = mean(&r);
    check(m >= -0.05, format!("knapsack model on 30 set covers: mean r_nodes {m:+.3} over {} rows", r.len()))
}

fn epsilon_statistics() -> Outcome {
    let inst = generate_knapsack(30, 10, 10, 10, 77).unwrap();
    let model = MlpParams::glorot(4);
    let bnc = BncConfig::default();
    let cfg = |bags, epsilon| TrainConfig {
        bags_per_instance: bags,
        epsilon,
        seed: 9,
        ..TrainConfig::default()
    };
    let err = |e: cutrank::Error| e.to_string();
    let half = collect_active(&inst, &model, &cfg(1000, 0.5), &bnc).map_err(err)?;
    let total = half.samples.len() + half.dropped;
    let frac = half.samples.iter().filter(|s| s.greedy).count() as f64 / half.samples.len() as f64;
    let random = collect_random(&inst, &cfg(200, 1.0), &bnc).map_err(err)?;
    let eps1 = collect_active(&inst, &model, &cfg(200, 1.0), &bnc).map_err(err)?;
    let eps0 = collect_active(&inst, &model, &cfg(200, 0.0), &bnc).map_err(err)?;
    let greedy_bag = &eps0.samples[0].bag;
    let pure_greedy = eps0.samples.iter().all(|s| s.greedy && &s.bag == greedy_bag);
    check(
        total == 1000 && half.dropped == 0 && (0.45..=0.55).contains(&frac) && random == eps1 && pure_greedy,
        format!(
            "greedy fraction {frac:.3} of {total}; eps=1 equals random stream: {}; eps=0 pure greedy: {pure_greedy}",
            random == eps1
        ),
    )
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let secs = t.elapsed().as_secs_f64();
    match &out {
        Ok(d) => println!("criterion {n:>2} {name:<24} PASS  {d}  ({secs:.1}s)"),
        Err(d) => println!("criterion {n:>2} {name:<24} FAIL  {d}  ({secs:.1}s)"),
    }
    out.is_ok()
}

fn main() {
    let mut models = Vec::new();
    let results = [
        run(1, "lp oracle", lp_oracle),
        run(2, "cut validity", cut_validity),
        run(3, "solution preservation", solution_preservation),
        run(4, "feature oracle", feature_oracle_check),
        run(5, "gradient check", gradient_check),
        run(6, "label contract", label_contract),
        run(7, "pipeline determinism", determinism),
        run(8, "learning signal", || learning_signal(&mut models)),
        run(9, "generalization", || generalization(&models)),
        run(10, "epsilon statistics", epsilon_statistics),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
