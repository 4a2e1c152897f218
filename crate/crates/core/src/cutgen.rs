//! Root-node candidate cut generation: Gomory fractional, minimal cover and
//! clique cuts. Every cut is stored as `alpha . x <= beta` over the
//! structural variables.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lp::{Relation, SimplexTableau};
use crate::model::{MipInstance, ProblemProperty};

/// Fractionality below which a value or coefficient counts as integral.
pub const FRAC_TOL: f64 = 1e-5;
/// Largest coefficient magnitude kept after scaling.
pub const MAX_COEF: f64 = 1e6;
/// Smallest violation at `x*_LP` for an emitted Gomory cut.
pub const MIN_GOMORY_VIOLATION: f64 = 1e-6;
const COEF_DROP: f64 = 1e-9;
const ACTIVITY_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutKind {
    Gomory,
    Cover,
    Clique,
}

impl CutKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CutKind::Gomory => "gomory",
            CutKind::Cover => "cover",
            CutKind::Clique => "clique",
        }
    }
}

impl fmt::Display for CutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gomory" => Ok(CutKind::Gomory),
            "cover" => Ok(CutKind::Cover),
            "clique" => Ok(CutKind::Clique),
            _ => Err(Error::Invalid(format!("unknown cut kind `{s}`"))),
        }
    }
}

/// `alpha . x <= beta`, with `alpha` sparse and sorted by column.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub alpha: Vec<(usize, f64)>,
    pub beta: f64,
    pub kind: CutKind,
    pub source_row: Option<usize>,
}

impl Cut {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.alpha.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// `alpha . x - beta`; positive when `x` is cut off.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.activity(x) - self.beta
    }

    pub fn nnz(&self) -> usize {
        self.alpha.len()
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        for &(j, a) in &self.alpha {
            v[j] = a;
        }
        v
    }

    pub fn is_well_formed(&self) -> bool {
        !self.alpha.is_empty()
            && self.beta.is_finite()
            && self.alpha.iter().all(|&(_, a)| a.is_finite() && a != 0.0)
            && self.alpha.windows(2).all(|w| w[0].0 < w[1].0)
            && self.alpha.iter().fold(0.0f64, |m, &(_, a)| m.max(a.abs())) <= MAX_COEF
    }

    /// Identity after scaling to unit max-coefficient, on a 1e-9 grid.
    fn dedup_key(&self) -> (Vec<(usize, i64)>, i64) {
        let scale = self.alpha.iter().fold(0.0f64, |m, &(_, a)| m.max(a.abs()));
        let q = |v: f64| (v / scale * 1e9).round() as i64;
        (
            self.alpha.iter().map(|&(j, a)| (j, q(a))).collect(),
            q(self.beta),
        )
    }
}

/// Build a cut from dense coefficients: drop negligible entries (relaxing
/// `beta` through the variable bounds) and scale into the coefficient cap.
/// Returns `None` if the result is empty or cannot be made safe.
fn assemble(
    dense: &[f64],
    mut beta: f64,
    lower: &[f64],
    upper: &[f64],
    kind: CutKind,
    source_row: Option<usize>,
) -> Option<Cut> {
    let big = dense.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if !(big > 0.0) || !big.is_finite() || !beta.is_finite() {
        return None;
    }
    let mut alpha = Vec::new();
    for (j, &a) in dense.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        if a.abs() < COEF_DROP * big {
            // a x_j >= min over the box; move the worst case to the rhs
            let worst = if a > 0.0 { a * lower[j] } else { a * upper[j] };
            if !worst.is_finite() {
                return None;
            }
            beta -= worst;
            continue;
        }
        alpha.push((j, a));
    }
    if alpha.is_empty() {
        return None;
    }
    if big > MAX_COEF {
        let s = MAX_COEF / big;
        for (_, a) in &mut alpha {
            *a *= s;
        }
        beta *= s;
    }
    let cut = Cut {
        alpha,
        beta,
        kind,
        source_row,
    };
    cut.is_well_formed().then_some(cut)
}

/// Integer rounding of one tableau row `coeffs . x = rhs` over nonnegative
/// integer variables: `(-a + floor(a)) . x <= -rhs + floor(rhs)`.
pub fn gomory_fractional_row(coeffs: &[f64], rhs: f64) -> (Vec<f64>, f64) {
    let alpha = coeffs.iter().map(|&a| -a + a.floor()).collect();
    (alpha, -rhs + rhs.floor())
}

/// Mixed-integer strengthening of the same row when some nonbasic columns
/// are continuous, scaled so its rhs is `-frac(rhs)` like the pure form:
/// integer columns get `min(f_j, f0 (1 - f_j) / (1 - f0))`, continuous
/// columns `a_j` when `a_j >= 0` and `-a_j f0 / (1 - f0)` otherwise.
pub fn gomory_mixed_row(coeffs: &[f64], integer: &[bool], rhs: f64) -> (Vec<f64>, f64) {
    let f0 = rhs - rhs.floor();
    let alpha = coeffs
        .iter()
        .zip(integer)
        .map(|(&a, &int)| {
            let g = if int {
                let f = a - a.floor();
                f.min(f0 * (1.0 - f) / (1.0 - f0))
            } else if a >= 0.0 {
                a
            } else {
                -a * f0 / (1.0 - f0)
            };
            -g
        })
        .collect();
    (alpha, -f0)
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < FRAC_TOL {
        r
    } else {
        v
    }
}

fn is_int(v: f64) -> bool {
    v.is_finite() && v == v.round()
}

/// Whether column `j` of the tableau (structural or slack) takes only
/// integer values on integer-feasible points.
fn integral_columns(tab: &SimplexTableau, inst: &MipInstance) -> Vec<bool> {
    let n = tab.n_structural;
    let mut out: Vec<bool> = (0..n).map(|j| inst.integer[j]).collect();
    for (row, &rhs) in tab.row_coeffs.iter().zip(&tab.row_rhs) {
        let ok = is_int(rhs)
            && row
                .iter()
                .enumerate()
                .all(|(k, &a)| a == 0.0 || (inst.integer[k] && is_int(a)));
        out.push(ok);
    }
    out
}

/// Gomory fractional cuts, one per eligible tableau row.
///
/// A row is eligible when its basic variable is integer-valued and
/// fractional at `x*_LP`. Nonbasic columns are shifted to their active
/// bound (complemented when at the upper bound) so the rounding runs over
/// nonnegative variables. Rows whose nonbasic columns are all integer with
/// integral bounds use the plain rounding formula; otherwise the
/// mixed-integer form. Slacks are then substituted out through their
/// defining rows. Rows with a free nonbasic column that is continuous or
/// carries a fractional coefficient are skipped.
pub fn generate_gomory(tab: &SimplexTableau, property: &ProblemProperty<'_>) -> Vec<Cut> {
    let inst = property.instance;
    let n = tab.n_structural;
    let width = tab.num_cols();
    let integral = integral_columns(tab, inst);
    let mut basic = vec![false; width];
    for &j in &tab.basic_vars {
        basic[j] = true;
    }

    let mut cuts = Vec::new();
    'rows: for (r, &bv) in tab.basic_vars.iter().enumerate() {
        if !integral[bv] {
            continue;
        }
        let value = tab.values[bv];
        let f0 = value - value.floor();
        if !(FRAC_TOL..=1.0 - FRAC_TOL).contains(&f0) {
            continue;
        }

        // Row in complemented space: x_B + sum abar_j y_j = value, y_j >= 0.
        let mut abar = vec![0.0; width];
        let mut int_col = vec![false; width];
        // (column, complemented, bound)
        let mut shifts: Vec<(usize, bool, f64)> = Vec::new();
        for j in 0..width {
            let a = tab.rows[r][j];
            if basic[j] || a.abs() < 1e-12 {
                continue;
            }
            let (lo, up) = (tab.lower[j], tab.upper[j]);
            if lo == up {
                continue;
            }
            let x = tab.values[j];
            let at_upper = up.is_finite() && (!lo.is_finite() || (x - up).abs() < (x - lo).abs());
            let a = if at_upper { -a } else { a };
            if !lo.is_finite() && !up.is_finite() {
                // free nonbasic: only an integral term on an integer column is harmless
                if integral[j] && snap(a) == snap(a).round() {
                    continue;
                }
                continue 'rows;
            }
            let bound = if at_upper { up } else { lo };
            int_col[j] = integral[j] && is_int(bound);
            abar[j] = if int_col[j] { snap(a) } else { a };
            shifts.push((j, at_upper, bound));
        }

        let mixed = shifts.iter().any(|&(j, _, _)| !int_col[j]);
        let (rounded, rhs) = if mixed {
            gomory_mixed_row(&abar, &int_col, value)
        } else {
            gomory_fractional_row(&abar, value)
        };
        let mut alpha = vec![0.0; n];
        let mut beta = rhs;
        for &(j, at_upper, bound) in &shifts {
            let g = rounded[j];
            if g == 0.0 {
                continue;
            }
            // g*y with y = x - bound, or y = bound - x when complemented
            let (coef, constant) = if at_upper { (-g, g * bound) } else { (g, -g * bound) };
            beta -= constant;
            if j < n {
                alpha[j] += coef;
            } else {
                // slack s_i = b_i - a_i . x
                let i = j - n;
                beta -= coef * tab.row_rhs[i];
                for (k, &aik) in tab.row_coeffs[i].iter().enumerate() {
                    if aik != 0.0 {
                        alpha[k] -= coef * aik;
                    }
                }
            }
        }
        let Some(cut) = assemble(&alpha, beta, &inst.lower, &inst.upper, CutKind::Gomory, Some(r))
        else {
            continue;
        };
        if cut.violation(&property.x_lp_star) >= MIN_GOMORY_VIOLATION {
            cuts.push(cut);
        }
    }
    cuts
}

/// Rows in `a . x <= b` form: `>=` rows negated, equalities contributing both sides.
fn le_rows(inst: &MipInstance) -> Vec<(usize, Vec<(usize, f64)>, f64)> {
    let mut out = Vec::new();
    for (i, row) in inst.constraints.iter().enumerate() {
        let neg: Vec<(usize, f64)> = row.coeffs.iter().map(|&(j, a)| (j, -a)).collect();
        match row.relation {
            Relation::Le => out.push((i, row.coeffs.clone(), row.rhs)),
            Relation::Ge => out.push((i, neg, -row.rhs)),
            Relation::Eq => {
                out.push((i, row.coeffs.clone(), row.rhs));
                out.push((i, neg, -row.rhs));
            }
        }
    }
    out
}

fn merged(coeffs: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut m: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    let mut sorted = coeffs.to_vec();
    sorted.sort_by_key(|&(j, _)| j);
    for (j, a) in sorted {
        match m.last_mut() {
            Some((k, v)) if *k == j => *v += a,
            _ => m.push((j, a)),
        }
    }
    m.retain(|&(_, a)| a != 0.0);
    m
}

/// Greedy minimal cover of one knapsack row, as column indices sorted ascending.
pub fn minimal_cover(items: &[(usize, f64)], capacity: f64) -> Option<Vec<usize>> {
    let mut order: Vec<(usize, f64)> = items.iter().copied().filter(|&(_, a)| a > 0.0).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut total = 0.0;
    let mut cover = Vec::new();
    for &(j, a) in &order {
        if total > capacity + ACTIVITY_EPS {
            break;
        }
        cover.push((j, a));
        total += a;
    }
    if total <= capacity + ACTIVITY_EPS {
        return None;
    }
    // Shrink to minimality, lightest members first.
    let mut k = cover.len();
    while k > 0 {
        k -= 1;
        if total - cover[k].1 > capacity + ACTIVITY_EPS {
            total -= cover[k].1;
            cover.remove(k);
        }
    }
    let mut cols: Vec<usize> = cover.into_iter().map(|(j, _)| j).collect();
    cols.sort_unstable();
    Some(cols)
}

/// Minimal cover cuts `sum_{j in C} x_j <= |C| - 1` from all-binary rows
/// with nonnegative coefficients and rhs.
pub fn generate_cover(inst: &MipInstance) -> Vec<Cut> {
    let mut cuts = Vec::new();
    for (i, coeffs, rhs) in le_rows(inst) {
        let coeffs = merged(&coeffs);
        if coeffs.len() < 2
            || rhs < 0.0
            || coeffs.iter().any(|&(j, a)| a < 0.0 || !inst.is_binary(j))
        {
            continue;
        }
        if let Some(cover) = minimal_cover(&coeffs, rhs) {
            let l = cover.len() as f64;
            cuts.push(Cut {
                alpha: cover.into_iter().map(|j| (j, 1.0)).collect(),
                beta: l - 1.0,
                kind: CutKind::Cover,
                source_row: Some(i),
            });
        }
    }
    cuts
}

/// Pairs of binaries that cannot both be 1, from all-binary rows.
pub fn conflict_graph(inst: &MipInstance) -> Vec<BTreeSet<usize>> {
    let n = inst.num_vars();
    let mut adj = vec![BTreeSet::new(); n];
    for (_, coeffs, rhs) in le_rows(inst) {
        let coeffs = merged(&coeffs);
        if coeffs.len() < 2 || coeffs.iter().any(|&(j, _)| !inst.is_binary(j)) {
            continue;
        }
        let min_act: f64 = coeffs.iter().map(|&(_, a)| a.min(0.0)).sum();
        // Only positive entries can create a conflict; test the largest pairs first.
        let mut pos: Vec<(usize, f64)> = coeffs.iter().copied().filter(|&(_, a)| a > 0.0).collect();
        pos.sort_by(|x, y| y.1.total_cmp(&x.1));
        for p in 0..pos.len() {
            for q in p + 1..pos.len() {
                let (i, ai) = pos[p];
                let (j, aj) = pos[q];
                if min_act + ai + aj > rhs + ACTIVITY_EPS {
                    adj[i].insert(j);
                    adj[j].insert(i);
                } else {
                    break;
                }
            }
        }
    }
    adj
}

/// Clique cuts `sum x <= 1` from greedy maximal cliques (size >= 3) of the
/// conflict graph, one seed per vertex in index order.
pub fn generate_clique(inst: &MipInstance) -> Vec<Cut> {
    let adj = conflict_graph(inst);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut cuts = Vec::new();
    for v in 0..adj.len() {
        if adj[v].len() < 2 {
            continue;
        }
        let mut clique = vec![v];
        for &u in &adj[v] {
            if clique.iter().all(|&c| adj[u].contains(&c)) {
                clique.push(u);
            }
        }
        if clique.len() < 3 {
            continue;
        }
        clique.sort_unstable();
        if seen.insert(clique.clone()) {
            cuts.push(Cut {
                alpha: clique.into_iter().map(|j| (j, 1.0)).collect(),
                beta: 1.0,
                kind: CutKind::Clique,
                source_row: None,
            });
        }
    }
    cuts
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutGenConfig {
    pub max_gomory: usize,
    pub max_cover: usize,
    pub max_clique: usize,
}

impl Default for CutGenConfig {
    fn default() -> Self {
        Self {
            max_gomory: 20,
            max_cover: 10,
            max_clique: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutPool {
    pub cuts: Vec<Cut>,
    pub n_gomory: usize,
    pub n_cover: usize,
    pub n_clique: usize,
}

impl CutPool {
    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Append cuts not already present (after normalization).
    pub fn extend_dedup(&mut self, cuts: impl IntoIterator<Item = Cut>) {
        let mut keys: HashSet<_> = self.cuts.iter().map(Cut::dedup_key).collect();
        for c in cuts {
            if keys.insert(c.dedup_key()) {
                match c.kind {
                    CutKind::Gomory => self.n_gomory += 1,
                    CutKind::Cover => self.n_cover += 1,
                    CutKind::Clique => self.n_clique += 1,
                }
                self.cuts.push(c);
            }
        }
    }
}

/// Keep at most `cap` Gomory cuts, preferring the most fractional source rows.
fn cap_gomory(mut cuts: Vec<Cut>, tab: &SimplexTableau, cap: usize) -> Vec<Cut> {
    if cuts.len() > cap {
        let frac = |c: &Cut| {
            let v = tab.values[tab.basic_vars[c.source_row.unwrap_or(0)]];
            let f = v - v.floor();
            f.min(1.0 - f)
        };
        cuts.sort_by(|a, b| frac(b).total_cmp(&frac(a)).then(a.source_row.cmp(&b.source_row)));
        cuts.truncate(cap);
        cuts.sort_by_key(|c| c.source_row);
    }
    cuts
}

/// Deterministic candidate pool: Gomory, then cover, then clique cuts,
/// deduplicated, each kind in source order.
pub fn candidate_cuts(
    inst: &MipInstance,
    property: &ProblemProperty<'_>,
    tab: &SimplexTableau,
    cfg: &CutGenConfig,
) -> CutPool {
    let mut pool = CutPool::default();
    pool.extend_dedup(cap_gomory(generate_gomory(tab, property), tab, cfg.max_gomory));
    pool.extend_dedup(generate_cover(inst).into_iter().take(cfg.max_cover));
    pool.extend_dedup(generate_clique(inst).into_iter().take(cfg.max_clique));
    pool
}
