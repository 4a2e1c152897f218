//! Linear programming relaxations.
//!
//! A bounded-variable primal simplex over a dense tableau. Every row is put
//! into `a x + s = b` form with a slack `s` (`s >= 0` for inequalities, `s`
//! fixed at zero for equalities), so the tableau lives in the space of
//! structural plus slack variables. Phase one uses artificial columns only
//! for rows whose slack cannot absorb the initial residual.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! falls back to Bland's rule until an improving step is taken.

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-9;
const STEP_TOL: f64 = 1e-12;
const DEGENERATE_BUDGET: usize = 50;
const MAX_REFRESH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "<=" => Some(Relation::Le),
            ">=" => Some(Relation::Ge),
            "=" => Some(Relation::Eq),
            _ => None,
        }
    }
}

/// One sparse row `sum coeffs[k].1 * x[coeffs[k].0]  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Self {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimize `objective . x` subject to the rows and variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program with no rows and every variable in `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Invalid(format!(
                "bound vectors have lengths {}/{}, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite()) {
            return Err(Error::Invalid(format!("non-finite objective coefficient {c}")));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(Error::Invalid(format!("bad bounds [{l}, {u}] on variable {j}")));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() > n {
                return Err(Error::Invalid(format!("row {i} has more than {n} coefficients")));
            }
            if !row.rhs.is_finite() {
                return Err(Error::Invalid(format!("row {i} has non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n || !a.is_finite() {
                    return Err(Error::Invalid(format!("row {i} has bad entry ({j}, {a})")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|r| r.violation(x));
        let bounds = (0..self.num_vars())
            .map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural values; meaningful only when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Basic column per row, indexing structural (`< n`) then slack columns.
    pub basis: Vec<usize>,
    pub iteration_count: u64,
}

impl LpSolution {
    fn failed(status: LpStatus, n: usize, iterations: u64) -> Self {
        Self {
            status,
            x: vec![0.0; n],
            objective_value: f64::NAN,
            basis: Vec::new(),
            iteration_count: iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Optimal tableau `B^-1 (A | I)` with `B^-1 b`, rows normalized to `<=`/`=`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexTableau {
    pub n_structural: usize,
    /// One row per basic variable over the `n + m` structural and slack columns.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub basic_vars: Vec<usize>,
    /// Values of all `n + m` columns at the solution.
    pub values: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// The normalized constraint matrix `A` (dense, `m x n`) that defines the slacks.
    pub row_coeffs: Vec<Vec<f64>>,
    pub row_rhs: Vec<f64>,
}

impl SimplexTableau {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.n_structural + self.row_rhs.len()
    }

    pub fn is_slack(&self, col: usize) -> bool {
        col >= self.n_structural
    }
}

/// `a x + s = b` view of a program. Columns `0..n` are structural, `n..n+m` slacks.
#[derive(Clone, Debug)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl StandardForm {
    pub fn build(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut lo = Vec::with_capacity(n + m);
        let mut up = Vec::with_capacity(n + m);
        lo.extend_from_slice(lower);
        up.extend_from_slice(upper);
        for (i, row) in lp.constraints.iter().enumerate() {
            let sign = if row.relation == Relation::Ge { -1.0 } else { 1.0 };
            for &(j, v) in &row.coeffs {
                a[i * n + j] += sign * v;
            }
            b[i] = sign * row.rhs;
            lo.push(0.0);
            up.push(if row.relation == Relation::Eq { 0.0 } else { f64::INFINITY });
        }
        Self {
            n,
            m,
            a,
            b,
            lower: lo,
            upper: up,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// Slack values `b - a x` for structural `x`.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| self.b[i] - self.row(i).iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }
}

/// Gauss-Jordan inverse of a dense row-major `k x k` matrix.
pub(crate) fn invert(k: usize, mat: &[f64]) -> Option<Vec<f64>> {
    let w = 2 * k;
    let mut aug = vec![0.0; k * w];
    for i in 0..k {
        aug[i * w..i * w + k].copy_from_slice(&mat[i * k..(i + 1) * k]);
        aug[i * w + k + i] = 1.0;
    }
    let scale = mat.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&p, &q| aug[p * w + col].abs().total_cmp(&aug[q * w + col].abs()))?;
        if aug[piv * w + col].abs() <= 1e-11 * scale {
            return None;
        }
        if piv != col {
            for c in 0..w {
                aug.swap(piv * w + c, col * w + c);
            }
        }
        let p = aug[col * w + col];
        for c in 0..w {
            aug[col * w + c] /= p;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = aug[r * w + col];
            if f != 0.0 {
                for c in 0..w {
                    aug[r * w + c] -= f * aug[col * w + c];
                }
            }
        }
    }
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k..(i + 1) * k].copy_from_slice(&aug[i * w + k..(i + 1) * w]);
    }
    Some(inv)
}

fn nonbasic_start(lo: f64, up: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if up.is_finite() {
        up
    } else {
        0.0
    }
}

#[derive(Debug, PartialEq)]
enum Outcome {
    Optimal,
    Unbounded,
    Stalled,
}

struct Simplex<'a> {
    sf: &'a StandardForm,
    m: usize,
    ncols: usize,
    /// Artificial columns: (row, sign).
    artificials: Vec<(usize, f64)>,
    tab: Vec<f64>,
    beta: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    iterations: u64,
    max_iterations: u64,
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let (n, m) = (sf.n, sf.m);
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = nonbasic_start(sf.lower[j], sf.upper[j]);
        }
        let mut lo = sf.lower.clone();
        let mut up = sf.upper.clone();
        let mut basis = Vec::with_capacity(m);
        let mut artificials = Vec::new();
        let mut art_values = Vec::new();
        for i in 0..m {
            let act: f64 = sf.row(i).iter().zip(&x[..n]).map(|(a, v)| a * v).sum();
            let need = sf.b[i] - act;
            let (sl, su) = (sf.lower[n + i], sf.upper[n + i]);
            if need >= sl - FEAS_TOL && need <= su + FEAS_TOL {
                x[n + i] = need;
                basis.push(n + i);
            } else {
                let at = if need < sl { sl } else { su };
                x[n + i] = at;
                let resid = need - at;
                let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
                basis.push(n + m + artificials.len());
                artificials.push((i, sign));
                art_values.push(resid.abs());
            }
        }
        for v in art_values {
            x.push(v);
            lo.push(0.0);
            up.push(f64::INFINITY);
        }
        let ncols = n + m + artificials.len();
        let mut row_of = vec![usize::MAX; ncols];
        for (r, &j) in basis.iter().enumerate() {
            row_of[j] = r;
        }
        let max_iterations = 50 * (m + ncols) as u64 + 5_000;
        Self {
            sf,
            m,
            ncols,
            artificials,
            tab: Vec::new(),
            beta: Vec::new(),
            d: vec![0.0; ncols],
            x,
            lo,
            up,
            basis,
            row_of,
            iterations: 0,
            max_iterations,
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let (n, m) = (self.sf.n, self.m);
        let mut col = vec![0.0; m];
        if j < n {
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.sf.a[i * n + j];
            }
        } else if j < n + m {
            col[j - n] = 1.0;
        } else {
            let (r, s) = self.artificials[j - n - m];
            col[r] = s;
        }
        col
    }

    /// Rebuild the tableau from scratch for the current basis.
    fn refactor(&mut self) -> bool {
        let (n, m) = (self.sf.n, self.m);
        let mut bmat = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                bmat[i * m + r] = v;
            }
        }
        let Some(binv) = invert(m, &bmat) else {
            return false;
        };
        let nc = self.ncols;
        let mut tab = vec![0.0; m * nc];
        for i in 0..m {
            let brow = &binv[i * m..(i + 1) * m];
            let trow = &mut tab[i * nc..(i + 1) * nc];
            for (k, &bik) in brow.iter().enumerate() {
                if bik == 0.0 {
                    continue;
                }
                let arow = &self.sf.a[k * n..(k + 1) * n];
                for j in 0..n {
                    trow[j] += bik * arow[j];
                }
                trow[n + k] = bik;
            }
            for (q, &(r, s)) in self.artificials.iter().enumerate() {
                trow[n + m + q] = s * brow[r];
            }
        }
        self.beta = (0..m)
            .map(|i| (0..m).map(|k| binv[i * m + k] * self.sf.b[k]).sum())
            .collect();
        self.tab = tab;
        self.recompute_basics();
        true
    }

    fn recompute_basics(&mut self) {
        let nc = self.ncols;
        for i in 0..self.m {
            let row = &self.tab[i * nc..(i + 1) * nc];
            let mut v = self.beta[i];
            for j in 0..nc {
                if self.row_of[j] == usize::MAX && row[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn price(&mut self, cost: &[f64]) {
        let nc = self.ncols;
        self.d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[i * nc..(i + 1) * nc];
            for j in 0..nc {
                self.d[j] -= cb * row[j];
            }
        }
        for &j in &self.basis {
            self.d[j] = 0.0;
        }
    }

    fn entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            if self.row_of[j] != usize::MAX || self.lo[j] == self.up[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = if dj < -OPT_TOL && self.x[j] < self.up[j] {
                1.0
            } else if dj > OPT_TOL && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| dj.abs() > s) {
                best = Some((j, dir, dj.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.tab[r * nc + q];
        for v in &mut self.tab[r * nc..(r + 1) * nc] {
            *v /= p;
        }
        self.beta[r] /= p;
        let prow: Vec<f64> = self.tab[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[q] = 0.0;
            self.beta[i] -= f * self.beta[r];
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(&prow) {
                *v -= dq * pv;
            }
        }
        self.d[q] = 0.0;
        let leaving = self.basis[r];
        self.row_of[leaving] = usize::MAX;
        self.basis[r] = q;
        self.row_of[q] = r;
    }

    fn iterate(&mut self, cost: &[f64]) -> Outcome {
        self.price(cost);
        let nc = self.ncols;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Outcome::Stalled;
            }
            let Some((q, dir)) = self.entering(bland) else {
                return Outcome::Optimal;
            };
            self.iterations += 1;

            let mut t_best = self.up[q] - self.lo[q];
            let mut leave: Option<usize> = None;
            let mut target_of_leave = 0.0;
            for i in 0..self.m {
                let alpha = self.tab[i * nc + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha;
                let bv = self.basis[i];
                let (lim, target) = if rate < 0.0 {
                    if !self.lo[bv].is_finite() {
                        continue;
                    }
                    ((self.x[bv] - self.lo[bv]) / -rate, self.lo[bv])
                } else {
                    if !self.up[bv].is_finite() {
                        continue;
                    }
                    ((self.up[bv] - self.x[bv]) / rate, self.up[bv])
                };
                let lim = lim.max(0.0);
                // Ties with the entering bound flip go to the flip.
                let take = match leave {
                    None => lim < t_best - STEP_TOL,
                    Some(r) => {
                        lim < t_best - STEP_TOL
                            || (lim <= t_best + STEP_TOL
                                && if bland {
                                    bv < self.basis[r]
                                } else {
                                    alpha.abs() > self.tab[r * nc + q].abs()
                                })
                    }
                };
                if take {
                    t_best = lim;
                    leave = Some(i);
                    target_of_leave = target;
                }
            }
            if !t_best.is_finite() {
                return Outcome::Unbounded;
            }

            if t_best > 0.0 {
                self.x[q] += dir * t_best;
                for i in 0..self.m {
                    let alpha = self.tab[i * nc + q];
                    if alpha != 0.0 {
                        self.x[self.basis[i]] -= dir * alpha * t_best;
                    }
                }
            }
            match leave {
                Some(r) => {
                    let bv = self.basis[r];
                    self.pivot(r, q);
                    self.x[bv] = target_of_leave;
                }
                None => {
                    self.x[q] = if dir > 0.0 { self.up[q] } else { self.lo[q] };
                }
            }

            if t_best <= STEP_TOL {
                degenerate += 1;
                if degenerate > DEGENERATE_BUDGET {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    fn artificial_sum(&self) -> f64 {
        let base = self.sf.n + self.m;
        self.x[base..].iter().map(|v| v.abs()).sum()
    }

    /// Pivot basic artificials out, then drop the artificial columns.
    fn remove_artificials(&mut self) -> bool {
        let base = self.sf.n + self.m;
        let nc = self.ncols;
        for r in 0..self.m {
            if self.basis[r] < base {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..base {
                if self.row_of[j] != usize::MAX {
                    continue;
                }
                let a = self.tab[r * nc + j].abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            let Some((j, _)) = best else {
                return false;
            };
            let art = self.basis[r];
            self.pivot(r, j);
            self.x[art] = 0.0;
        }
        self.artificials.clear();
        self.ncols = base;
        self.x.truncate(base);
        self.lo.truncate(base);
        self.up.truncate(base);
        self.row_of.truncate(base);
        self.d.truncate(base);
        self.refactor()
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&j| {
            let v = self.x[j];
            v >= self.lo[j] - FEAS_TOL * (1.0 + self.lo[j].abs())
                && v <= self.up[j] + FEAS_TOL * (1.0 + self.up[j].abs())
        })
    }
}

/// Solve `lp` with its own bounds.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    solve_lp_with_bounds(lp, &lp.lower, &lp.upper)
}

/// Solve `lp` with replacement variable bounds (branching).
pub fn solve_lp_with_bounds(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> LpSolution {
    let n = lp.num_vars();
    if (0..n).any(|j| lower[j] > upper[j] + FEAS_TOL) {
        return LpSolution::failed(LpStatus::Infeasible, n, 0);
    }
    let sf = StandardForm::build(lp, lower, upper);
    solve_standard(lp, &sf)
}

fn solve_standard(lp: &LinearProgram, sf: &StandardForm) -> LpSolution {
    let (n, m) = (sf.n, sf.m);
    let mut spx = Simplex::new(sf);
    if !spx.refactor() {
        return LpSolution::failed(LpStatus::NumericalFailure, n, 0);
    }

    if !spx.artificials.is_empty() {
        let mut cost = vec![0.0; spx.ncols];
        for c in &mut cost[n + m..] {
            *c = 1.0;
        }
        match spx.iterate(&cost) {
            Outcome::Optimal => {}
            Outcome::Unbounded | Outcome::Stalled => {
                return LpSolution::failed(LpStatus::NumericalFailure, n, spx.iterations)
            }
        }
        let scale = 1.0 + sf.b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if spx.artificial_sum() > FEAS_TOL * scale {
            return LpSolution::failed(LpStatus::Infeasible, n, spx.iterations);
        }
        if !spx.remove_artificials() {
            return LpSolution::failed(LpStatus::NumericalFailure, n, spx.iterations);
        }
    }

    let mut cost = vec![0.0; n + m];
    cost[..n].copy_from_slice(&lp.objective);
    let mut refreshes = 0;
    loop {
        match spx.iterate(&cost) {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return LpSolution::failed(LpStatus::Unbounded, n, spx.iterations)
            }
            Outcome::Stalled => {
                return LpSolution::failed(LpStatus::NumericalFailure, n, spx.iterations)
            }
        }
        if !spx.refactor() || !spx.primal_feasible() {
            return LpSolution::failed(LpStatus::NumericalFailure, n, spx.iterations);
        }
        spx.price(&cost);
        if spx.entering(false).is_none() {
            break;
        }
        refreshes += 1;
        if refreshes >= MAX_REFRESH {
            return LpSolution::failed(LpStatus::NumericalFailure, n, spx.iterations);
        }
    }

    let mut x: Vec<f64> = spx.x[..n].to_vec();
    for (j, v) in x.iter_mut().enumerate() {
        *v = v.clamp(sf.lower[j], sf.upper[j]);
    }
    if lp.max_violation(&x) > FEAS_TOL * (1.0 + sf.b.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
        return LpSolution::failed(LpStatus::NumericalFailure, n, spx.iterations);
    }
    LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&x),
        x,
        basis: spx.basis.clone(),
        iteration_count: spx.iterations,
    }
}

/// Rebuild the optimal tableau `B^-1 (A | I)` and `B^-1 b` from the solution's basis.
pub fn extract_tableau(lp: &LinearProgram, sol: &LpSolution) -> Result<SimplexTableau> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invalid(format!(
            "tableau requested for a {:?} solution",
            sol.status
        )));
    }
    let sf = StandardForm::build(lp, &lp.lower, &lp.upper);
    let (n, m) = (sf.n, sf.m);
    let width = n + m;
    if sol.basis.len() != m || sol.basis.iter().any(|&j| j >= width) {
        return Err(Error::Invalid("basis does not match the program".into()));
    }
    let mut seen = vec![false; width];
    for &j in &sol.basis {
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::Invalid(format!("column {j} repeated in basis")));
        }
    }

    let column = |j: usize, i: usize| -> f64 {
        if j < n {
            sf.a[i * n + j]
        } else if j - n == i {
            1.0
        } else {
            0.0
        }
    };
    let mut bmat = vec![0.0; m * m];
    for (r, &j) in sol.basis.iter().enumerate() {
        for i in 0..m {
            bmat[i * m + r] = column(j, i);
        }
    }
    let binv = invert(m, &bmat)
        .ok_or_else(|| Error::NumericalFailure("singular basis matrix".into()))?;

    let mut rows = vec![vec![0.0; width]; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        let brow = &binv[i * m..(i + 1) * m];
        let row = &mut rows[i];
        for (k, &bik) in brow.iter().enumerate() {
            if bik == 0.0 {
                continue;
            }
            for j in 0..n {
                row[j] += bik * sf.a[k * n + j];
            }
            row[n + k] = bik;
            rhs[i] += bik * sf.b[k];
        }
        // Basic columns are unit vectors by construction; clear round-off.
        for (r, &j) in sol.basis.iter().enumerate() {
            row[j] = if r == i { 1.0 } else { 0.0 };
        }
    }

    let mut values = sol.x.clone();
    values.extend(sf.slacks(&sol.x));
    Ok(SimplexTableau {
        n_structural: n,
        rows,
        rhs,
        basic_vars: sol.basis.clone(),
        values,
        lower: sf.lower.clone(),
        upper: sf.upper.clone(),
        row_coeffs: (0..m).map(|i| sf.row(i).to_vec()).collect(),
        row_rhs: sf.b.clone(),
    })
}
