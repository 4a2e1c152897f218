//! Experiment harness: instance generation, bag collection, training and
//! evaluation over directories of artifacts.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! manifest.csv            split,seed,file,rows,cols
//! instances/{train,test}/<name>.mip
//! dataset/<name>.crds
//! model.crnk
//! train_log.csv           epoch,L_ce,omega,total
//! metrics.csv             instance,policy,status,nodes,simplex_iters,wall_time,r_time,r_nodes
//! summary.csv
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::Deserialize;

use crate::bnc::{
    baseline_reports, evaluate_policy, metrics_to_csv, solve_mip, summary_to_csv, BncConfig,
    FeedbackMode, PolicyMetrics, SolveReport,
};
use crate::cutgen::CutGenConfig;
use crate::error::{Error, Result};
use crate::model::{
    generate_general_mip, generate_knapsack, generate_planning, generate_set_cover, read_instance,
    write_instance, Family, MipInstance,
};
use crate::scorer::{load_model, save_model, MlpParams, SelectionPolicy};
use crate::train::{
    collect_dataset, loss_log_csv, read_instance_data, train, write_instance_data, Dataset,
    TrainConfig,
};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub output_dir: PathBuf,
    pub train_count: u64,
    pub test_count: u64,
    pub train_seed_start: u64,
    pub test_seed_start: u64,
    /// 0 lets the thread pool decide.
    pub workers: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            train_count: 100,
            test_count: 30,
            train_seed_start: 0,
            test_seed_start: 100_000,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub family: String,
    pub n_elements: usize,
    pub n_sets: usize,
    pub density: f64,
    pub n_items: usize,
    pub max_number: u32,
    pub max_value: u32,
    pub max_weight: u32,
    pub n_factories: usize,
    pub n_demands: usize,
    pub n_vars: usize,
    pub n_cons: usize,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        Self {
            family: "knapsack".into(),
            n_elements: 200,
            n_sets: 200,
            density: 0.1,
            n_items: 700,
            max_number: 10,
            max_value: 10,
            max_weight: 10,
            n_factories: 20,
            n_demands: 50,
            n_vars: 30,
            n_cons: 30,
        }
    }
}

impl GeneratorSection {
    pub fn family(&self) -> Result<Family> {
        match self.family.parse::<Family>() {
            Ok(Family::Custom) | Err(_) => Err(Error::Config(format!(
                "unknown generator family `{}` (setcover, knapsack, planning, general)",
                self.family
            ))),
            Ok(f) => Ok(f),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<MipInstance> {
        let r = match self.family()? {
            Family::SetCover => generate_set_cover(self.n_elements, self.n_sets, self.density, seed),
            Family::Knapsack => {
                generate_knapsack(self.n_items, self.max_number, self.max_value, self.max_weight, seed)
            }
            Family::Planning => generate_planning(self.n_factories, self.n_demands, seed),
            Family::GeneralMip => generate_general_mip(self.n_vars, self.n_cons, seed),
            Family::Custom => unreachable!(),
        };
        r.map_err(|e| Error::Generation(format!("seed {seed}: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub k_percent: f64,
    pub lambda_percent: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub bags_per_instance: usize,
    pub feedback_mode: String,
    pub relabel: bool,
    pub seed: u64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            k_percent: t.k_percent,
            lambda_percent: t.lambda_percent,
            gamma: t.gamma,
            learning_rate: t.learning_rate,
            epsilon: t.epsilon,
            epochs: t.epochs,
            batch_size: t.batch_size,
            bags_per_instance: t.bags_per_instance,
            feedback_mode: t.feedback_mode.to_string(),
            relabel: t.relabel,
            seed: t.seed,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub node_limit: u64,
    pub time_limit: f64,
    pub max_gomory: usize,
    pub max_cover: usize,
    pub max_clique: usize,
    pub random_seed: u64,
}

impl Default for SolveSection {
    fn default() -> Self {
        let b = BncConfig::default();
        Self {
            node_limit: b.node_limit,
            time_limit: b.time_limit,
            max_gomory: b.cutgen.max_gomory,
            max_cover: b.cutgen.max_cover,
            max_clique: b.cutgen.max_clique,
            random_seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub generator: GeneratorSection,
    pub train: TrainSection,
    pub solve: SolveSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn train_seeds(&self) -> std::ops::Range<u64> {
        let e = &self.experiment;
        e.train_seed_start..e.train_seed_start + e.train_count
    }

    pub fn test_seeds(&self) -> std::ops::Range<u64> {
        let e = &self.experiment;
        e.test_seed_start..e.test_seed_start + e.test_count
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.train_seeds(), self.test_seeds());
        if a.start < b.end && b.start < a.end {
            return Err(Error::Config(format!(
                "train seeds {a:?} and test seeds {b:?} overlap"
            )));
        }
        self.generator.family()?;
        self.train_config()?.validate()?;
        self.bnc_config(SelectionPolicy::Violation)?.validate()
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.train;
        Ok(TrainConfig {
            k_percent: t.k_percent,
            lambda_percent: t.lambda_percent,
            gamma: t.gamma,
            learning_rate: t.learning_rate,
            epsilon: t.epsilon,
            epochs: t.epochs,
            batch_size: t.batch_size,
            bags_per_instance: t.bags_per_instance,
            feedback_mode: t.feedback_mode.parse()?,
            relabel: t.relabel,
            seed: t.seed,
        })
    }

    pub fn feedback_mode(&self) -> Result<FeedbackMode> {
        self.train.feedback_mode.parse()
    }

    pub fn bnc_config(&self, policy: SelectionPolicy) -> Result<BncConfig> {
        let s = &self.solve;
        Ok(BncConfig {
            policy,
            k_percent: self.train.k_percent,
            node_limit: s.node_limit,
            time_limit: s.time_limit,
            feedback_mode: self.feedback_mode()?,
            cutgen: CutGenConfig {
                max_gomory: s.max_gomory,
                max_cover: s.max_cover,
                max_clique: s.max_clique,
            },
            seed: s.random_seed,
            ..BncConfig::default()
        })
    }

    /// The six policies compared side by side.
    pub fn policies(&self, model: &MlpParams) -> Vec<SelectionPolicy> {
        vec![
            SelectionPolicy::Random(self.solve.random_seed),
            SelectionPolicy::Violation,
            SelectionPolicy::NormViolation,
            SelectionPolicy::Distance,
            SelectionPolicy::Parallelism,
            SelectionPolicy::CutRanking(model.clone()),
        ]
    }

    pub fn out(&self, rel: &str) -> PathBuf {
        self.experiment.output_dir.join(rel)
    }

    /// Run `f` on a pool sized by `workers`.
    pub fn with_workers<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.experiment.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn instance_path(cfg: &ExperimentConfig, split: &str, name: &str) -> PathBuf {
    cfg.out("instances").join(split).join(format!("{name}.mip"))
}

/// Write every train and test instance plus the manifest.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    for split in ["train", "test"] {
        mkdir(&cfg.out("instances").join(split))?;
    }
    let jobs: Vec<(&str, u64)> = cfg
        .train_seeds()
        .map(|s| ("train", s))
        .chain(cfg.test_seeds().map(|s| ("test", s)))
        .collect();
    let rows = cfg.with_workers(|| {
        jobs.par_iter()
            .map(|&(split, seed)| {
                let inst = cfg.generator.generate(seed)?;
                let path = instance_path(cfg, split, &inst.name);
                write_instance(&inst, &path)?;
                let (m, n) = inst.size();
                Ok(format!("{split},{seed},instances/{split}/{}.mip,{m},{n}\n", inst.name))
            })
            .collect::<Result<Vec<String>>>()
    })??;
    let manifest = cfg.out("manifest.csv");
    write(&manifest, &(String::from("split,seed,file,rows,cols\n") + &rows.concat()))?;
    info!("wrote {} instances", rows.len());
    Ok(manifest)
}

/// Instances of one split, in manifest order.
pub fn load_split(cfg: &ExperimentConfig, split: &str) -> Result<Vec<MipInstance>> {
    let manifest = cfg.out("manifest.csv");
    let text = fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(Error::parse(manifest.display().to_string(), i + 1, "expected 5 columns"));
        }
        if cells[0] == split {
            out.push(read_instance(cfg.experiment.output_dir.join(cells[2]))?);
        }
    }
    Ok(out)
}

fn dataset_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out("dataset")
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "crds"))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(Error::io(dir, e)),
    };
    files.sort();
    Ok(Dataset {
        instances: files.iter().map(read_instance_data).collect::<Result<_>>()?,
    })
}

/// One collection round over the training split: random bags without a
/// model, epsilon-greedy bags with one. The round is merged into any
/// dataset already on disk and relabelled.
pub fn cmd_collect(cfg: &ExperimentConfig, model: Option<&Path>) -> Result<PathBuf> {
    cfg.validate()?;
    let tcfg = cfg.train_config()?;
    let bnc = cfg.bnc_config(SelectionPolicy::Violation)?;
    let params = model.map(load_model).transpose()?;
    let instances = load_split(cfg, "train")?;
    let round = cfg.with_workers(|| collect_dataset(&instances, params.as_ref(), &tcfg, &bnc))??;
    let dir = dataset_dir(cfg);
    let mut data = load_dataset(&dir)?;
    data.merge_round(round, tcfg.lambda_percent, tcfg.relabel);
    mkdir(&dir)?;
    for d in &data.instances {
        write_instance_data(d, dir.join(format!("{}.crds", d.instance)))?;
    }
    info!(
        "dataset: {} instances, {} samples",
        data.instances.len(),
        data.num_samples()
    );
    Ok(dir)
}

pub fn cmd_train(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let data = load_dataset(&dataset_dir(cfg))?;
    let out = train(&data, &cfg.train_config()?)?;
    let model = cfg.out("model.crnk");
    save_model(&out.params, &model)?;
    write(&cfg.out("train_log.csv"), &loss_log_csv(&out.trace))?;
    if let Some(last) = out.trace.last() {
        info!("final loss {:.6} after {} epochs", last.total, last.epoch);
    }
    Ok(model)
}

/// Evaluate all six policies on the test split against no-cut baselines.
pub fn evaluate_all(
    cfg: &ExperimentConfig,
    instances: &[MipInstance],
    model: &MlpParams,
) -> Result<Vec<PolicyMetrics>> {
    let base_cfg = cfg.bnc_config(SelectionPolicy::Violation)?;
    cfg.with_workers(|| {
        let base = baseline_reports(instances, &base_cfg)?;
        cfg.policies(model)
            .into_iter()
            .map(|p| evaluate_policy(instances, &base_cfg.with_policy(p), &base))
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn cmd_evaluate(cfg: &ExperimentConfig, model: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let params = load_model(model)?;
    let instances = load_split(cfg, "test")?;
    let metrics = evaluate_all(cfg, &instances, &params)?;
    let rows: Vec<_> = metrics.iter().flat_map(|m| m.rows.clone()).collect();
    let path = cfg.out("metrics.csv");
    write(&path, &metrics_to_csv(&rows))?;
    write(&cfg.out("summary.csv"), &summary_to_csv(&metrics))?;
    for m in &metrics {
        info!(
            "{:<15} r_time {:+.3} ± {:.3}  r_nodes {:+.3} ± {:.3}  ({} used, {} excluded)",
            m.policy, m.mean_r_time, m.std_r_time, m.mean_r_nodes, m.std_r_nodes, m.n_used, m.n_excluded
        );
    }
    Ok(path)
}

pub fn policy_by_name(name: &str, seed: u64, model: Option<&Path>) -> Result<SelectionPolicy> {
    Ok(match name {
        "random" => SelectionPolicy::Random(seed),
        "violation" => SelectionPolicy::Violation,
        "norm_violation" => SelectionPolicy::NormViolation,
        "distance" => SelectionPolicy::Distance,
        "parallelism" => SelectionPolicy::Parallelism,
        "cut_ranking" => {
            let path = model.ok_or_else(|| Error::Config("cut_ranking needs a model file".into()))?;
            SelectionPolicy::CutRanking(load_model(path)?)
        }
        other => return Err(Error::Config(format!("unknown policy `{other}`"))),
    })
}

pub const REPORT_HEADER: &str =
    "instance,policy,status,objective,nodes,simplex_iters,wall_time,cuts_generated,cuts_added";

pub fn report_csv_row(r: &SolveReport, policy: &str) -> String {
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:?}"));
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.instance,
        policy,
        r.status,
        opt(r.objective),
        r.nodes_visited,
        r.simplex_iterations,
        opt(r.wall_time),
        r.cuts_generated,
        r.cuts_added
    )
}

/// Solve one instance file; policy `none` disables cuts.
pub fn cmd_solve(
    instance: &Path,
    policy: &str,
    model: Option<&Path>,
    cfg: &ExperimentConfig,
) -> Result<SolveReport> {
    let inst = read_instance(instance)?;
    let bnc = if policy == "none" {
        cfg.bnc_config(SelectionPolicy::Violation)?.baseline()
    } else {
        cfg.bnc_config(policy_by_name(policy, cfg.solve.random_seed, model)?)?
    };
    solve_mip(&inst, &bnc)
}
