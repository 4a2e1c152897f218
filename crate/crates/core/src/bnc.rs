//! Branch-and-cut driver with cuts at the root only, and the reduction-ratio
//! evaluation metrics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::cutgen::{candidate_cuts, CutGenConfig, CutPool};
use crate::error::{Error, Result};
use crate::lp::{
    extract_tableau, solve_lp, solve_lp_with_bounds, LinearProgram, LpStatus, Relation,
};
use crate::model::{MipInstance, ProblemProperty};
use crate::scorer::SelectionPolicy;

pub const INT_TOL: f64 = 1e-6;
pub const GAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FeedbackMode {
    WallClock,
    #[default]
    DeterministicWork,
}

impl FromStr for FeedbackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall_clock" | "wallclock" => Ok(FeedbackMode::WallClock),
            "deterministic_work" | "work" => Ok(FeedbackMode::DeterministicWork),
            _ => Err(Error::Config(format!("unknown feedback mode `{s}`"))),
        }
    }
}

impl fmt::Display for FeedbackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackMode::WallClock => "wall_clock",
            FeedbackMode::DeterministicWork => "deterministic_work",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BranchRule {
    #[default]
    MostFractional,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NodeSelection {
    #[default]
    BestBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BncConfig {
    pub policy: SelectionPolicy,
    /// Root selection budget in percent; 0 disables cuts entirely.
    pub k_percent: f64,
    pub node_limit: u64,
    /// Seconds.
    pub time_limit: f64,
    pub feedback_mode: FeedbackMode,
    pub branching: BranchRule,
    pub node_selection: NodeSelection,
    pub cutgen: CutGenConfig,
    pub seed: u64,
}

impl Default for BncConfig {
    fn default() -> Self {
        Self {
            policy: SelectionPolicy::Violation,
            k_percent: 30.0,
            node_limit: 1_000_000,
            time_limit: 60.0,
            feedback_mode: FeedbackMode::DeterministicWork,
            branching: BranchRule::MostFractional,
            node_selection: NodeSelection::BestBound,
            cutgen: CutGenConfig::default(),
            seed: 0,
        }
    }
}

impl BncConfig {
    /// Same limits and mode, no cuts.
    pub fn baseline(&self) -> Self {
        Self {
            k_percent: 0.0,
            ..self.clone()
        }
    }

    pub fn with_policy(&self, policy: SelectionPolicy) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.k_percent) {
            return Err(Error::Config(format!("K must lie in [0, 100], got {}", self.k_percent)));
        }
        if self.node_limit == 0 || !(self.time_limit > 0.0) {
            return Err(Error::Config("node and time limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A limit was hit with an incumbent in hand.
    Feasible,
    /// Proven infeasible, or a limit was hit before any incumbent.
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub instance: String,
    pub status: SolveStatus,
    pub limit_hit: bool,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub nodes_visited: u64,
    pub simplex_iterations: u64,
    /// Seconds; `None` in deterministic-work mode so reports compare exactly.
    pub wall_time: Option<f64>,
    pub cuts_generated: usize,
    pub cuts_added: usize,
    pub failed_nodes: u64,
    /// Global lower bound each time a node is taken off the queue.
    pub bound_trace: Vec<f64>,
}

impl SolveReport {
    /// Solve effort `T` under the given feedback mode.
    pub fn effort(&self, mode: FeedbackMode) -> Result<f64> {
        match mode {
            FeedbackMode::DeterministicWork => Ok(self.simplex_iterations as f64),
            FeedbackMode::WallClock => self
                .wall_time
                .ok_or_else(|| Error::Validation("report carries no wall time".into())),
        }
    }

    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Optimal && !self.limit_hit
    }
}

/// `(T0 - T1) / T0`, zero when the baseline did no work.
pub fn reduction_ratio(t0: f64, t1: f64) -> f64 {
    if t0 == 0.0 {
        0.0
    } else {
        (t0 - t1) / t0
    }
}

/// Root LP solution and candidate pool shared by every solve of one instance.
pub struct RootInfo<'a> {
    pub property: ProblemProperty<'a>,
    pub pool: CutPool,
    pub lp_iterations: u64,
}

pub fn prepare_root<'a>(inst: &'a MipInstance, cutgen: &CutGenConfig) -> Result<RootInfo<'a>> {
    inst.validate()?;
    let lp = inst.lp_relaxation();
    let sol = solve_lp(&lp);
    let property = ProblemProperty::from_solution(inst, &sol)?;
    let tab = extract_tableau(&lp, &sol)?;
    let pool = candidate_cuts(inst, &property, &tab, cutgen);
    Ok(RootInfo {
        property,
        pool,
        lp_iterations: sol.iteration_count,
    })
}

struct Node {
    bound: f64,
    id: u64,
    /// Cumulative bound changes from the root: (column, lower, upper).
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.id.cmp(&self.id))
    }
}

struct Search {
    incumbent: Option<(Vec<f64>, f64)>,
    nodes: u64,
    iterations: u64,
    failed: u64,
    limit_hit: bool,
    trace: Vec<f64>,
    root_status: Option<LpStatus>,
}

fn most_fractional(inst: &MipInstance, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in x.iter().enumerate() {
        if !inst.integer[j] {
            continue;
        }
        let f = v - v.floor();
        let d = f.min(1.0 - f);
        if d > INT_TOL && best.is_none_or(|(_, bd)| d > bd) {
            best = Some((j, d));
        }
    }
    best.map(|b| b.0)
}

/// Integer columns rounded, when that stays feasible.
fn polish(inst: &MipInstance, x: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = x
        .iter()
        .zip(&inst.integer)
        .map(|(&v, &int)| if int { v.round() } else { v })
        .collect();
    if inst.is_feasible(&r, 1e-6) {
        r
    } else {
        x.to_vec()
    }
}

fn branch_and_bound(
    inst: &MipInstance,
    lp: &LinearProgram,
    cfg: &BncConfig,
    start: Instant,
) -> Search {
    let mut s = Search {
        incumbent: None,
        nodes: 0,
        iterations: 0,
        failed: 0,
        limit_hit: false,
        trace: Vec::new(),
        root_status: None,
    };
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: next_id,
        changes: Vec::new(),
    });
    next_id += 1;
    let mut lower = inst.lower.clone();
    let mut upper = inst.upper.clone();

    while let Some(node) = heap.pop() {
        let cutoff = s.incumbent.as_ref().map_or(f64::INFINITY, |i| i.1);
        if node.bound >= cutoff - GAP_TOL {
            // every remaining node is at least as bad
            heap.clear();
            break;
        }
        if s.nodes >= cfg.node_limit || start.elapsed().as_secs_f64() > cfg.time_limit {
            s.limit_hit = true;
            heap.push(node);
            break;
        }
        s.trace.push(node.bound);
        s.nodes += 1;

        lower.copy_from_slice(&inst.lower);
        upper.copy_from_slice(&inst.upper);
        for &(j, lo, up) in &node.changes {
            lower[j] = lo;
            upper[j] = up;
        }
        let sol = solve_lp_with_bounds(lp, &lower, &upper);
        s.iterations += sol.iteration_count;
        if s.nodes == 1 {
            s.root_status = Some(sol.status);
        }
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded | LpStatus::NumericalFailure => {
                s.failed += 1;
                continue;
            }
        }
        let obj = sol.objective_value.max(node.bound);
        if obj >= cutoff - GAP_TOL {
            continue;
        }
        match most_fractional(inst, &sol.x) {
            None => {
                let x = polish(inst, &sol.x);
                let v = inst.objective_at(&x);
                if v < cutoff {
                    s.incumbent = Some((x, v));
                }
            }
            Some(j) => {
                let v = sol.x[j];
                let (lo, up) = (lower[j], upper[j]);
                for (nlo, nup) in [(lo, v.floor()), (v.ceil(), up)] {
                    let mut changes = node.changes.clone();
                    changes.push((j, nlo, nup));
                    heap.push(Node {
                        bound: obj,
                        id: next_id,
                        changes,
                    });
                    next_id += 1;
                }
            }
        }
    }
    if !heap.is_empty() {
        s.limit_hit = true;
    }
    s
}

/// Branch and bound on `inst` with the selected pool cuts appended. The
/// pre-cut root LP work is charged only when at least one cut is added.
pub fn solve_with_cuts(
    inst: &MipInstance,
    root: &RootInfo<'_>,
    selected: &[usize],
    cfg: &BncConfig,
) -> Result<SolveReport> {
    run(inst, &root.pool, selected, root.lp_iterations, cfg, Instant::now())
}

fn run(
    inst: &MipInstance,
    pool: &CutPool,
    selected: &[usize],
    root_iterations: u64,
    cfg: &BncConfig,
    start: Instant,
) -> Result<SolveReport> {
    let mut lp = inst.lp_relaxation();
    for &i in selected {
        let c = pool
            .cuts
            .get(i)
            .ok_or_else(|| Error::Invalid(format!("cut index {i} outside the pool")))?;
        lp.add_constraint(c.alpha.clone(), Relation::Le, c.beta);
    }
    let s = branch_and_bound(inst, &lp, cfg, start);
    match s.root_status {
        Some(LpStatus::Unbounded) => return Err(Error::Unbounded),
        Some(LpStatus::NumericalFailure) => {
            return Err(Error::NumericalFailure(format!("root LP of `{}` failed", inst.name)))
        }
        _ => {}
    }
    let pre = if selected.is_empty() { 0 } else { root_iterations };
    let status = match (&s.incumbent, s.limit_hit) {
        (Some(_), false) => SolveStatus::Optimal,
        (Some(_), true) => SolveStatus::Feasible,
        (None, _) => SolveStatus::Infeasible,
    };
    let (x, objective) = match s.incumbent {
        Some((x, v)) => (Some(x), Some(v)),
        None => (None, None),
    };
    Ok(SolveReport {
        instance: inst.name.clone(),
        status,
        limit_hit: s.limit_hit,
        x,
        objective,
        nodes_visited: s.nodes,
        simplex_iterations: pre + s.iterations,
        wall_time: match cfg.feedback_mode {
            FeedbackMode::WallClock => Some(start.elapsed().as_secs_f64()),
            FeedbackMode::DeterministicWork => None,
        },
        cuts_generated: pool.len(),
        cuts_added: selected.len(),
        failed_nodes: s.failed,
        bound_trace: s.trace,
    })
}

/// Full solve: root LP, candidate pool, policy selection of the top K%,
/// then branch and bound with the selected cuts. With `k_percent = 0` no
/// cuts are generated.
pub fn solve_mip(inst: &MipInstance, cfg: &BncConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let start = Instant::now();
    if cfg.k_percent == 0.0 {
        inst.validate()?;
        return run(inst, &CutPool::default(), &[], 0, cfg, start);
    }
    let root = prepare_root(inst, &cfg.cutgen)?;
    let selected = cfg.policy.select(&root.pool, &root.property, cfg.k_percent)?;
    run(inst, &root.pool, &selected, root.lp_iterations, cfg, start)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub instance: String,
    pub policy: String,
    pub status: SolveStatus,
    pub nodes: u64,
    pub simplex_iters: u64,
    pub wall_time: Option<f64>,
    /// `None` when either solve hit a limit.
    pub r_time: Option<f64>,
    pub r_nodes: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyMetrics {
    pub policy: String,
    pub rows: Vec<MetricsRow>,
    pub mean_r_time: f64,
    pub std_r_time: f64,
    pub mean_r_nodes: f64,
    pub std_r_nodes: f64,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Population mean and standard deviation; NaN for an empty sample.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

pub fn metrics_row(
    report: &SolveReport,
    baseline: &SolveReport,
    policy: &str,
    mode: FeedbackMode,
) -> Result<MetricsRow> {
    if report.instance != baseline.instance {
        return Err(Error::Validation(format!(
            "report for `{}` paired with baseline for `{}`",
            report.instance, baseline.instance
        )));
    }
    let usable = report.solved() && baseline.solved();
    let (r_time, r_nodes) = if usable {
        (
            Some(reduction_ratio(baseline.effort(mode)?, report.effort(mode)?)),
            Some(reduction_ratio(
                baseline.nodes_visited as f64,
                report.nodes_visited as f64,
            )),
        )
    } else {
        (None, None)
    };
    Ok(MetricsRow {
        instance: report.instance.clone(),
        policy: policy.to_string(),
        status: report.status,
        nodes: report.nodes_visited,
        simplex_iters: report.simplex_iterations,
        wall_time: report.wall_time,
        r_time,
        r_nodes,
    })
}

pub fn summarize(policy: &str, rows: Vec<MetricsRow>) -> PolicyMetrics {
    let rt: Vec<f64> = rows.iter().filter_map(|r| r.r_time).collect();
    let rn: Vec<f64> = rows.iter().filter_map(|r| r.r_nodes).collect();
    let (mean_r_time, std_r_time) = mean_std(&rt);
    let (mean_r_nodes, std_r_nodes) = mean_std(&rn);
    PolicyMetrics {
        policy: policy.to_string(),
        n_used: rn.len(),
        n_excluded: rows.len() - rn.len(),
        rows,
        mean_r_time,
        std_r_time,
        mean_r_nodes,
        std_r_nodes,
    }
}

/// No-cut solves of every instance, in order.
pub fn baseline_reports(instances: &[MipInstance], cfg: &BncConfig) -> Result<Vec<SolveReport>> {
    let base = cfg.baseline();
    instances.par_iter().map(|i| solve_mip(i, &base)).collect()
}

pub fn evaluate_policy(
    instances: &[MipInstance],
    cfg: &BncConfig,
    baseline: &[SolveReport],
) -> Result<PolicyMetrics> {
    if instances.len() != baseline.len() {
        return Err(Error::Validation(format!(
            "{} instances but {} baseline reports",
            instances.len(),
            baseline.len()
        )));
    }
    let name = cfg.policy.name();
    let rows = instances
        .par_iter()
        .zip(baseline)
        .map(|(inst, base)| {
            let rep = solve_mip(inst, cfg)?;
            metrics_row(&rep, base, name, cfg.feedback_mode)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(name, rows))
}

pub const METRICS_HEADER: &str = "instance,policy,status,nodes,simplex_iters,wall_time,r_time,r_nodes";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:?}"))
}

pub fn metrics_to_csv(rows: &[MetricsRow]) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance,
            r.policy,
            r.status,
            r.nodes,
            r.simplex_iters,
            opt(r.wall_time),
            opt(r.r_time),
            opt(r.r_nodes)
        ));
    }
    s
}

pub const SUMMARY_HEADER: &str =
    "policy,mean_r_time,std_r_time,mean_r_nodes,std_r_nodes,n_used,n_excluded";

pub fn summary_to_csv(metrics: &[PolicyMetrics]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for m in metrics {
        s.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{},{}\n",
            m.policy, m.mean_r_time, m.std_r_time, m.mean_r_nodes, m.std_r_nodes, m.n_used, m.n_excluded
        ));
    }
    s
}
