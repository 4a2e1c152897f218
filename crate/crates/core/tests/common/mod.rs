//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the solver paths under test.
#![allow(dead_code)]

/// Dense row `a . x <= b` (or `= b` when `eq`).
#[derive(Clone, Debug)]
pub struct DenseRow {
    pub a: Vec<f64>,
    pub b: f64,
    pub eq: bool,
}

/// Solve a square system by Gaussian elimination with partial pivoting.
pub fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(p, c);
        rhs.swap(p, c);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

/// Visit every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimum of `c . x` over the polytope, by enumerating every basic point.
/// Returns `None` if no vertex is feasible.
pub fn vertex_enumeration_min(c: &[f64], rows: &[DenseRow], tol: f64) -> Option<f64> {
    let n = c.len();
    let mut best: Option<f64> = None;
    for_each_subset(rows.len(), n, |sel| {
        let m: Vec<Vec<f64>> = sel.iter().map(|&i| rows[i].a.clone()).collect();
        let rhs: Vec<f64> = sel.iter().map(|&i| rows[i].b).collect();
        let Some(x) = solve_square(m, rhs) else { return };
        let feasible = rows.iter().all(|r| {
            let lhs: f64 = r.a.iter().zip(&x).map(|(a, v)| a * v).sum();
            if r.eq {
                (lhs - r.b).abs() <= tol
            } else {
                lhs <= r.b + tol
            }
        });
        if feasible {
            let v: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    });
    best
}

/// Every integer point in the box `lo..=hi` (inclusive, per coordinate).
pub fn integer_grid(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (&l, &h) in lo.iter().zip(hi) {
        let mut next = Vec::new();
        for p in &out {
            for v in l..=h {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Bounded knapsack maximum by dynamic programming over capacity.
pub fn knapsack_dp(values: &[i64], weights: &[i64], counts: &[i64], capacity: i64) -> i64 {
    let cap = capacity.max(0) as usize;
    let mut best = vec![0i64; cap + 1];
    for i in 0..values.len() {
        for _ in 0..counts[i] {
            let w = weights[i] as usize;
            for c in (w..=cap).rev() {
                best[c] = best[c].max(best[c - w] + values[i]);
            }
        }
    }
    best[cap]
}

/// Independent dense re-derivation of the 14 cut features, in column order.
pub fn feature_oracle(alpha: &[f64], beta: f64, z: &[f64], x: &[f64], integer: &[bool]) -> [f64; 14] {
    let n = alpha.len();
    let mut coef = Vec::new();
    let mut obj = Vec::new();
    let mut nnz_int = 0usize;
    for j in 0..n {
        if alpha[j] != 0.0 {
            coef.push(alpha[j]);
            obj.push(z[j]);
            if integer[j] {
                nnz_int += 1;
            }
        }
    }
    let moments = |v: &[f64]| {
        let k = v.len() as f64;
        let mut sum = 0.0;
        let mut hi = v[0];
        let mut lo = v[0];
        for &a in v {
            sum += a;
            if a > hi {
                hi = a;
            }
            if a < lo {
                lo = a;
            }
        }
        let mean = sum / k;
        let mut ss = 0.0;
        for &a in v {
            ss += (a - mean).powi(2);
        }
        [mean, hi, lo, (ss / k).sqrt()]
    };
    let mut dot_ax = 0.0;
    let mut dot_az = 0.0;
    let mut aa = 0.0;
    let mut zz = 0.0;
    for j in 0..n {
        dot_ax += alpha[j] * x[j];
        dot_az += alpha[j] * z[j];
        aa += alpha[j] * alpha[j];
        zz += z[j] * z[j];
    }
    let viol = dot_ax - beta;
    let denom = if beta.abs() < 1e-9 { 1.0 } else { beta.abs() };
    let dist = viol.abs() / aa.sqrt();
    let par = if zz == 0.0 { 0.0 } else { dot_az / (zz.sqrt() * aa.sqrt()) };
    let c = moments(&coef);
    let o = moments(&obj);
    [
        c[0],
        c[1],
        c[2],
        c[3],
        o[0],
        o[1],
        o[2],
        o[3],
        coef.len() as f64 / n as f64,
        nnz_int as f64 / coef.len() as f64,
        if viol / denom > 0.0 { viol / denom } else { 0.0 },
        dist,
        par,
        zz.sqrt() * dist,
    ]
}

/// Pure-integer instance with small boxes, feasible at a planted point.
pub fn small_integer_instance(seed: u64) -> cutrank::model::MipInstance {
    use cutrank::lp::Relation;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=3);
    let obj = (0..n).map(|_| rng.gen_range(-6..=2) as f64).collect();
    let mut inst = cutrank::model::MipInstance::new(format!("small-{seed}"), obj, vec![true; n]);
    inst.seed = seed;
    let mut planted = vec![0.0; n];
    for j in 0..n {
        inst.lower[j] = rng.gen_range(-1..=0) as f64;
        inst.upper[j] = inst.lower[j] + rng.gen_range(1..=4) as f64;
        planted[j] = rng.gen_range(inst.lower[j] as i64..=inst.upper[j] as i64) as f64;
    }
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n)
            .map(|j| (j, rng.gen_range(-4..=5) as f64))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * planted[j]).sum();
        let (rel, rhs) = match rng.gen_range(0..4) {
            0 => (Relation::Ge, act - rng.gen_range(0..=2) as f64),
            _ => (Relation::Le, act + rng.gen_range(0..=2) as f64),
        };
        inst.add_constraint(coeffs, rel, rhs);
    }
    inst
}

/// Every integer point of the box that satisfies all rows.
pub fn feasible_points(inst: &cutrank::model::MipInstance) -> Vec<Vec<f64>> {
    let lo: Vec<i64> = inst.lower.iter().map(|&v| v as i64).collect();
    let hi: Vec<i64> = inst.upper.iter().map(|&v| v as i64).collect();
    integer_grid(&lo, &hi)
        .into_iter()
        .map(|p| p.into_iter().map(|v| v as f64).collect::<Vec<f64>>())
        .filter(|p| {
            inst.constraints.iter().all(|r| {
                let act: f64 = r.coeffs.iter().map(|&(j, a)| a * p[j]).sum();
                match r.relation {
                    cutrank::lp::Relation::Le => act <= r.rhs + 1e-9,
                    cutrank::lp::Relation::Ge => act >= r.rhs - 1e-9,
                    cutrank::lp::Relation::Eq => (act - r.rhs).abs() <= 1e-9,
                }
            })
        })
        .collect()
}

/// Minimum objective over the enumerated feasible points.
pub fn brute_force_optimum(inst: &cutrank::model::MipInstance) -> Option<f64> {
    feasible_points(inst)
        .iter()
        .map(|p| p.iter().zip(&inst.objective).map(|(x, c)| x * c).sum::<f64>())
        .min_by(f64::total_cmp)
}

/// Random feasible, bounded LP around a planted interior point.
pub fn random_lp(seed: u64, max_vars: usize, max_rows: usize) -> cutrank::lp::LinearProgram {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=max_rows);
    let obj = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let mut lp = cutrank::lp::LinearProgram::new(obj);
    let mut x0 = vec![0.0; n];
    for j in 0..n {
        lp.lower[j] = rng.gen_range(-3i32..=0) as f64;
        lp.upper[j] = lp.lower[j] + rng.gen_range(1i32..=6) as f64;
        x0[j] = rng.gen_range(lp.lower[j]..lp.upper[j]);
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-4.0..4.0)));
            }
        }
        if coeffs.is_empty() {
            continue;
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let (rel, rhs) = match rng.gen_range(0..6) {
            0 => (cutrank::lp::Relation::Eq, act),
            1 | 2 => (cutrank::lp::Relation::Ge, act - rng.gen_range(0.0..2.0)),
            _ => (cutrank::lp::Relation::Le, act + rng.gen_range(0.0..2.0)),
        };
        lp.add_constraint(coeffs, rel, rhs);
    }
    lp
}

/// The same program as dense `<=`/`=` rows with bounds as rows.
pub fn dense_rows(lp: &cutrank::lp::LinearProgram) -> Vec<DenseRow> {
    let n = lp.num_vars();
    let mut rows = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] += v;
        }
        match c.relation {
            cutrank::lp::Relation::Le => rows.push(DenseRow { a, b: c.rhs, eq: false }),
            cutrank::lp::Relation::Eq => rows.push(DenseRow { a, b: c.rhs, eq: true }),
            cutrank::lp::Relation::Ge => rows.push(DenseRow {
                a: a.iter().map(|v| -v).collect(),
                b: -c.rhs,
                eq: false,
            }),
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push(DenseRow { a: e.clone(), b: lp.upper[j], eq: false });
        e[j] = -1.0;
        rows.push(DenseRow { a: e, b: -lp.lower[j], eq: false });
    }
    rows
}

/// Up to six binaries with pairwise conflicts and one knapsack row, so cover
/// and clique separation both have something to work on.
pub fn small_binary_instance(seed: u64) -> cutrank::model::MipInstance {
    use cutrank::lp::Relation;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=6);
    let obj = (0..n).map(|_| -(rng.gen_range(1..=9) as f64)).collect();
    let mut inst = cutrank::model::MipInstance::new(format!("bin-{seed}"), obj, vec![true; n]);
    inst.seed = seed;
    inst.upper = vec![1.0; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                inst.add_constraint(vec![(i, 1.0), (j, 1.0)], Relation::Le, 1.0);
            }
        }
    }
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(2..=9) as f64).collect();
    let cap = (w.iter().sum::<f64>() * rng.gen_range(0.3..0.6)).floor();
    inst.add_constraint(w.into_iter().enumerate().collect(), Relation::Le, cap);
    inst
}
