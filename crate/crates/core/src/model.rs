//! MIP instances, synthetic generators and the `MIPR1` instance file format.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, Constraint, LinearProgram, LpSolution, LpStatus, Relation, FEAS_TOL};

pub const INSTANCE_MAGIC: &str = "MIPR1";

/// Default set-cover column density.
pub const SET_COVER_DENSITY: f64 = 0.1;
/// Set-cover column costs are drawn from `1..=SET_COVER_MAX_COST`.
pub const SET_COVER_MAX_COST: i64 = 100;
/// Knapsack capacity as a fraction of the total weight of all item copies.
pub const KNAPSACK_CAPACITY_RATIO: f64 = 0.5;
const COVER_REPAIR_BUDGET: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    SetCover,
    Knapsack,
    Planning,
    GeneralMip,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::SetCover => "setcover",
            Family::Knapsack => "knapsack",
            Family::Planning => "planning",
            Family::GeneralMip => "general",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "setcover" | "set_cover" => Ok(Family::SetCover),
            "knapsack" => Ok(Family::Knapsack),
            "planning" => Ok(Family::Planning),
            "general" | "general_mip" => Ok(Family::GeneralMip),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Invalid(format!("unknown family `{other}`"))),
        }
    }
}

/// `min objective . x  s.t.  rows, lower <= x <= upper, x_j integer where integer[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MipInstance {
    pub name: String,
    pub family: Family,
    pub seed: u64,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
}

impl MipInstance {
    pub fn new(name: impl Into<String>, objective: Vec<f64>, integer: Vec<bool>) -> Self {
        let n = objective.len();
        Self {
            name: name.into(),
            family: Family::Custom,
            seed: 0,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            integer,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    /// `(rows, columns)`.
    pub fn size(&self) -> (usize, usize) {
        (self.num_rows(), self.num_vars())
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn is_binary(&self, j: usize) -> bool {
        self.integer[j] && self.lower[j] == 0.0 && self.upper[j] == 1.0
    }

    pub fn num_integer(&self) -> usize {
        self.integer.iter().filter(|&&b| b).count()
    }

    pub fn lp_relaxation(&self) -> LinearProgram {
        LinearProgram {
            objective: self.objective.clone(),
            constraints: self.constraints.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Row, bound and integrality feasibility within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && self.lp_relaxation().max_violation(x) <= tol
            && x
                .iter()
                .zip(&self.integer)
                .all(|(v, &int)| !int || (v - v.round()).abs() <= tol)
    }

    pub fn validate(&self) -> Result<()> {
        if self.integer.len() != self.num_vars() {
            return Err(Error::Invalid(format!(
                "integrality mask has length {}, expected {}",
                self.integer.len(),
                self.num_vars()
            )));
        }
        self.lp_relaxation().validate()
    }
}

fn rng_for(family: Family, seed: u64) -> ChaCha8Rng {
    let salt = match family {
        Family::SetCover => 0x5e7c,
        Family::Knapsack => 0x4a95,
        Family::Planning => 0x91a2,
        Family::GeneralMip => 0x6e4d,
        Family::Custom => 0,
    };
    ChaCha8Rng::seed_from_u64(seed ^ (salt << 48))
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::Invalid(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// Minimum-cost set cover over binary set variables, one `>= 1` row per element.
pub fn generate_set_cover(
    n_elements: usize,
    n_sets: usize,
    density: f64,
    seed: u64,
) -> Result<MipInstance> {
    positive("n_elements", n_elements)?;
    positive("n_sets", n_sets)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Invalid(format!("density {density} outside (0, 1]")));
    }
    let mut rng = rng_for(Family::SetCover, seed);
    let mut member = vec![vec![false; n_sets]; n_elements];
    for row in member.iter_mut() {
        for m in row.iter_mut() {
            *m = rng.gen_bool(density);
        }
    }
    let mut retries = 0;
    for i in 0..n_elements {
        while !member[i].iter().any(|&b| b) {
            retries += 1;
            if retries > COVER_REPAIR_BUDGET {
                return Err(Error::Generation(format!(
                    "density {density} leaves element {i} uncovered after {COVER_REPAIR_BUDGET} redraws"
                )));
            }
            for m in member[i].iter_mut() {
                *m = rng.gen_bool(density);
            }
        }
    }
    let cost = (0..n_sets)
        .map(|_| rng.gen_range(1..=SET_COVER_MAX_COST) as f64)
        .collect();
    let mut inst = MipInstance::new(
        format!("setcover-{n_elements}x{n_sets}-{seed}"),
        cost,
        vec![true; n_sets],
    );
    inst.family = Family::SetCover;
    inst.seed = seed;
    inst.upper = vec![1.0; n_sets];
    for row in &member {
        let coeffs = (0..n_sets).filter(|&j| row[j]).map(|j| (j, 1.0)).collect();
        inst.add_constraint(coeffs, Relation::Ge, 1.0);
    }
    Ok(inst)
}

/// Bounded integer knapsack, `max value . x` encoded as `min -value . x`.
///
/// One capacity row plus one `x_i <= count_i` row per item. With
/// `max_number = 1` every item is binary (the 0/1 variant).
pub fn generate_knapsack(
    n_items: usize,
    max_number: u32,
    max_value: u32,
    max_weight: u32,
    seed: u64,
) -> Result<MipInstance> {
    positive("n_items", n_items)?;
    positive("max_number", max_number as usize)?;
    positive("max_value", max_value as usize)?;
    positive("max_weight", max_weight as usize)?;
    let mut rng = rng_for(Family::Knapsack, seed);
    let mut values = Vec::with_capacity(n_items);
    let mut weights = Vec::with_capacity(n_items);
    let mut counts = Vec::with_capacity(n_items);
    for _ in 0..n_items {
        values.push(rng.gen_range(1..=max_value) as f64);
        weights.push(rng.gen_range(1..=max_weight) as f64);
        counts.push(rng.gen_range(1..=max_number) as f64);
    }
    let total: f64 = weights.iter().zip(&counts).map(|(w, c)| w * c).sum();
    let capacity = (KNAPSACK_CAPACITY_RATIO * total).floor().max(1.0);

    let mut inst = MipInstance::new(
        format!("knapsack-{n_items}-{seed}"),
        values.iter().map(|v| -v).collect(),
        vec![true; n_items],
    );
    inst.family = Family::Knapsack;
    inst.seed = seed;
    inst.upper = counts.clone();
    inst.add_constraint(
        weights.iter().copied().enumerate().collect(),
        Relation::Le,
        capacity,
    );
    for (i, &c) in counts.iter().enumerate() {
        inst.add_constraint(vec![(i, 1.0)], Relation::Le, c);
    }
    Ok(inst)
}

/// Column layout of a planning instance.
#[derive(Clone, Copy, Debug)]
pub struct PlanningLayout {
    pub n_factories: usize,
    pub n_demands: usize,
}

impl PlanningLayout {
    pub fn ship(&self, f: usize, d: usize) -> usize {
        f * self.n_demands + d
    }

    /// Transfer from `f` to `g`, `f != g`.
    pub fn transfer(&self, f: usize, g: usize) -> usize {
        let base = self.n_factories * self.n_demands;
        let k = if g < f { g } else { g - 1 };
        base + f * (self.n_factories - 1) + k
    }

    pub fn open(&self, f: usize) -> usize {
        self.n_factories * self.n_demands + self.n_factories * (self.n_factories - 1) + f
    }

    pub fn modules(&self, f: usize) -> usize {
        self.open(f) + self.n_factories
    }

    pub fn num_vars(&self) -> usize {
        self.n_factories * (self.n_demands + self.n_factories + 1)
    }
}

/// Capacity provided by one production module.
pub const PLANNING_MODULE_CAPACITY: f64 = 10.0;

/// Fixed-charge production and transport planning.
///
/// Columns: continuous shipments factory x demand, continuous transfers
/// between distinct factories, a binary open flag and an integer module
/// count per factory. Rows: demand coverage and a shipping budget per
/// demand, production balance and an open/module link per factory.
pub fn generate_planning(n_factories: usize, n_demands: usize, seed: u64) -> Result<MipInstance> {
    positive("n_factories", n_factories)?;
    positive("n_demands", n_demands)?;
    let mut rng = rng_for(Family::Planning, seed);
    let lay = PlanningLayout {
        n_factories,
        n_demands,
    };
    let (nf, nd) = (n_factories, n_demands);
    let demand: Vec<f64> = (0..nd).map(|_| rng.gen_range(1..=20) as f64).collect();
    let ship_cost: Vec<Vec<f64>> = (0..nf)
        .map(|_| (0..nd).map(|_| rng.gen_range(1..=10) as f64).collect())
        .collect();
    let fixed: Vec<f64> = (0..nf).map(|_| rng.gen_range(100..=500) as f64).collect();
    let module_cost: Vec<f64> = (0..nf).map(|_| rng.gen_range(1..=20) as f64).collect();
    let transfer_cost: Vec<f64> = (0..nf * nf).map(|_| rng.gen_range(1..=5) as f64).collect();
    let total_demand: f64 = demand.iter().sum();
    let max_modules = (2.0 * total_demand / (PLANNING_MODULE_CAPACITY * nf as f64))
        .ceil()
        .max(1.0);

    let n = lay.num_vars();
    let mut obj = vec![0.0; n];
    let mut integer = vec![false; n];
    for f in 0..nf {
        for d in 0..nd {
            obj[lay.ship(f, d)] = ship_cost[f][d];
        }
        for g in (0..nf).filter(|&g| g != f) {
            obj[lay.transfer(f, g)] = transfer_cost[f * nf + g];
        }
        obj[lay.open(f)] = fixed[f];
        obj[lay.modules(f)] = module_cost[f];
        integer[lay.open(f)] = true;
        integer[lay.modules(f)] = true;
    }
    let mut inst = MipInstance::new(format!("planning-{nf}x{nd}-{seed}"), obj, integer);
    inst.family = Family::Planning;
    inst.seed = seed;
    for f in 0..nf {
        inst.upper[lay.open(f)] = 1.0;
        inst.upper[lay.modules(f)] = max_modules;
    }
    for d in 0..nd {
        inst.add_constraint((0..nf).map(|f| (lay.ship(f, d), 1.0)).collect(), Relation::Ge, demand[d]);
    }
    for d in 0..nd {
        let cheapest = (0..nf).map(|f| ship_cost[f][d]).fold(f64::INFINITY, f64::min);
        let budget = (1.5 * demand[d] * cheapest).ceil();
        inst.add_constraint(
            (0..nf).map(|f| (lay.ship(f, d), ship_cost[f][d])).collect(),
            Relation::Le,
            budget,
        );
    }
    for f in 0..nf {
        let mut coeffs: Vec<(usize, f64)> = (0..nd).map(|d| (lay.ship(f, d), 1.0)).collect();
        for g in (0..nf).filter(|&g| g != f) {
            coeffs.push((lay.transfer(f, g), 1.0));
            coeffs.push((lay.transfer(g, f), -1.0));
        }
        coeffs.push((lay.modules(f), -PLANNING_MODULE_CAPACITY));
        inst.add_constraint(coeffs, Relation::Le, 0.0);
    }
    for f in 0..nf {
        inst.add_constraint(
            vec![(lay.modules(f), 1.0), (lay.open(f), -max_modules)],
            Relation::Le,
            0.0,
        );
    }
    Ok(inst)
}

/// Upper bound on every general-MIP variable.
pub const GENERAL_MIP_BOUND: f64 = 10.0;

/// Dense random MIP around a planted integer point; the first half of the
/// columns (rounded up) are integer, the rest continuous.
pub fn generate_general_mip(n_vars: usize, n_cons: usize, seed: u64) -> Result<MipInstance> {
    positive("n_vars", n_vars)?;
    positive("n_cons", n_cons)?;
    let mut rng = rng_for(Family::GeneralMip, seed);
    let planted: Vec<f64> = (0..n_vars)
        .map(|_| rng.gen_range(0..=GENERAL_MIP_BOUND as i64) as f64)
        .collect();
    let obj = (0..n_vars).map(|_| rng.gen_range(-10..=10) as f64).collect();
    let n_int = n_vars.div_ceil(2);
    let integer = (0..n_vars).map(|j| j < n_int).collect();
    let mut inst = MipInstance::new(format!("general-{n_cons}x{n_vars}-{seed}"), obj, integer);
    inst.family = Family::GeneralMip;
    inst.seed = seed;
    inst.upper = vec![GENERAL_MIP_BOUND; n_vars];
    for _ in 0..n_cons {
        let mut coeffs = Vec::new();
        for j in 0..n_vars {
            let a = rng.gen_range(-5..=5);
            if a != 0 {
                coeffs.push((j, a as f64));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.gen_range(0..n_vars), 1.0));
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * planted[j]).sum();
        let rhs = act + rng.gen_range(0..=5) as f64;
        inst.add_constraint(coeffs, Relation::Le, rhs);
    }
    Ok(inst)
}

/// Root LP solution paired with the instance it belongs to.
#[derive(Clone, Debug)]
pub struct ProblemProperty<'a> {
    pub x_lp_star: Vec<f64>,
    pub instance: &'a MipInstance,
}

impl<'a> ProblemProperty<'a> {
    pub fn from_solution(instance: &'a MipInstance, sol: &LpSolution) -> Result<Self> {
        match sol.status {
            LpStatus::Optimal => Ok(Self {
                x_lp_star: sol.x.clone(),
                instance,
            }),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::NumericalFailure => Err(Error::NumericalFailure(format!(
                "root LP of {} failed",
                instance.name
            ))),
        }
    }

    pub fn objective(&self) -> &[f64] {
        &self.instance.objective
    }

    pub fn num_vars(&self) -> usize {
        self.instance.num_vars()
    }
}

/// Solve the root LP relaxation and package `{x*_LP, instance}`.
pub fn problem_property(inst: &MipInstance) -> Result<ProblemProperty<'_>> {
    inst.validate()?;
    let sol = solve_lp(&inst.lp_relaxation());
    let prop = ProblemProperty::from_solution(inst, &sol)?;
    debug_assert!(inst.lp_relaxation().max_violation(&prop.x_lp_star) <= FEAS_TOL * 10.0);
    Ok(prop)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Serialize in the `MIPR1` text format.
pub fn instance_to_string(inst: &MipInstance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{INSTANCE_MAGIC}");
    let _ = writeln!(s, "name {}", inst.name);
    let _ = writeln!(s, "family {}", inst.family);
    let _ = writeln!(s, "seed {}", inst.seed);
    let _ = writeln!(s, "vars {}", inst.num_vars());
    let _ = writeln!(s, "rows {}", inst.num_rows());
    for j in 0..inst.num_vars() {
        let _ = writeln!(
            s,
            "var {j} {} {} {} {}",
            if inst.integer[j] { "I" } else { "C" },
            fmt_f64(inst.objective[j]),
            fmt_f64(inst.lower[j]),
            fmt_f64(inst.upper[j])
        );
    }
    for (i, row) in inst.constraints.iter().enumerate() {
        let _ = write!(
            s,
            "row {i} {} {} {}",
            row.relation.symbol(),
            fmt_f64(row.rhs),
            row.coeffs.len()
        );
        for &(j, a) in &row.coeffs {
            let _ = write!(s, " {j} {}", fmt_f64(a));
        }
        s.push('\n');
    }
    s.push_str("end\n");
    s
}

pub fn write_instance(inst: &MipInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, instance_to_string(inst)).map_err(|e| Error::io(path, e))
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<MipInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, &path.display().to_string())
}

/// Line-oriented reader shared by the text formats.
pub(crate) struct Lines<'t> {
    iter: std::iter::Enumerate<std::str::Lines<'t>>,
    pub source: String,
    pub line: usize,
}

impl<'t> Lines<'t> {
    pub fn new(text: &'t str, source: &str) -> Self {
        Self {
            iter: text.lines().enumerate(),
            source: source.to_string(),
            line: 0,
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.source.clone(), self.line, msg)
    }

    pub fn next_line(&mut self) -> Result<&'t str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    pub fn tokens(&mut self) -> Result<Vec<&'t str>> {
        Ok(self.next_line()?.split_whitespace().collect())
    }

    /// Next line as `key value`, returning the value.
    pub fn keyed(&mut self, key: &str) -> Result<&'t str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ => Err(self.err(format!("expected `{key} <value>`"))),
        }
    }

    pub fn parse<T: FromStr>(&self, tok: &str, what: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.err(format!("bad {what} `{tok}`")))
    }

    pub fn expect(&mut self, want: &str) -> Result<()> {
        let line = self.next_line()?;
        if line.trim() == want {
            Ok(())
        } else {
            Err(self.err(format!("expected `{want}`")))
        }
    }
}

pub fn parse_instance(text: &str, source: &str) -> Result<MipInstance> {
    let mut lines = Lines::new(text, source);
    lines.expect(INSTANCE_MAGIC)?;
    let name = lines.keyed("name")?.to_string();
    let family: Family = {
        let v = lines.keyed("family")?;
        v.parse().map_err(|_| lines.err(format!("unknown family `{v}`")))?
    };
    let seed: u64 = {
        let v = lines.keyed("seed")?;
        lines.parse(v, "seed")?
    };
    let n: usize = {
        let v = lines.keyed("vars")?;
        lines.parse(v, "variable count")?
    };
    let m: usize = {
        let v = lines.keyed("rows")?;
        lines.parse(v, "row count")?
    };
    let mut inst = MipInstance::new(name, vec![0.0; n], vec![false; n]);
    inst.family = family;
    inst.seed = seed;
    for j in 0..n {
        let t = lines.tokens()?;
        if t.len() != 6 || t[0] != "var" || lines.parse::<usize>(t[1], "variable index")? != j {
            return Err(lines.err(format!("expected `var {j} <I|C> <obj> <lb> <ub>`")));
        }
        inst.integer[j] = match t[2] {
            "I" => true,
            "C" => false,
            other => return Err(lines.err(format!("bad integrality flag `{other}`"))),
        };
        inst.objective[j] = lines.parse(t[3], "objective coefficient")?;
        inst.lower[j] = lines.parse(t[4], "lower bound")?;
        inst.upper[j] = lines.parse(t[5], "upper bound")?;
    }
    for i in 0..m {
        let t = lines.tokens()?;
        if t.len() < 5 || t[0] != "row" || lines.parse::<usize>(t[1], "row index")? != i {
            return Err(lines.err(format!("expected `row {i} <rel> <rhs> <nnz> ...`")));
        }
        let rel = Relation::from_symbol(t[2])
            .ok_or_else(|| lines.err(format!("bad relation `{}`", t[2])))?;
        let rhs: f64 = lines.parse(t[3], "rhs")?;
        let nnz: usize = lines.parse(t[4], "nonzero count")?;
        if t.len() != 5 + 2 * nnz {
            return Err(lines.err(format!("row {i} declares {nnz} nonzeros")));
        }
        let mut coeffs = Vec::with_capacity(nnz);
        for k in 0..nnz {
            let j: usize = lines.parse(t[5 + 2 * k], "column index")?;
            if j >= n {
                return Err(lines.err(format!("column {j} out of range")));
            }
            coeffs.push((j, lines.parse(t[6 + 2 * k], "coefficient")?));
        }
        inst.add_constraint(coeffs, rel, rhs);
    }
    lines.expect("end")?;
    inst.validate().map_err(|e| lines.err(e.to_string()))?;
    Ok(inst)
}
