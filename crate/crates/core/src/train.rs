//! Bag collection (random and epsilon-greedy), ranking labels and
//! mini-batch training of the scoring network.

use std::collections::HashMap;
use std::path::Path;

use log::{debug, warn};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bnc::{prepare_root, reduction_ratio, solve_with_cuts, BncConfig, FeedbackMode};
use crate::cutgen::{Cut, CutKind, CutPool};
use crate::error::{Error, Result};
use crate::features::{
    bag_features, compute_cut_features, zscore_apply, zscore_fit, BagFeatures, CutFeatures,
    FeatureStats, NUM_FEATURES,
};
use crate::model::{Lines, MipInstance};
use crate::scorer::{select_top_k, top_k_count, MlpParams};

pub const DATASET_MAGIC: &str = "CRDS1";

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub k_percent: f64,
    pub lambda_percent: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub bags_per_instance: usize,
    pub feedback_mode: FeedbackMode,
    /// Relabel all of an instance's samples after each collection round.
    pub relabel: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k_percent: 30.0,
            lambda_percent: 50.0,
            gamma: 0.1,
            learning_rate: 1e-2,
            epsilon: 0.2,
            epochs: 300,
            batch_size: 32,
            bags_per_instance: 100,
            feedback_mode: FeedbackMode::DeterministicWork,
            relabel: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.k_percent > 0.0 && self.k_percent <= 100.0) {
            return bad("K must lie in (0, 100]");
        }
        if !(self.lambda_percent > 0.0 && self.lambda_percent < 100.0) {
            return bad("lambda must lie in (0, 100)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be nonnegative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 || self.bags_per_instance == 0 {
            return bad("batch size and bags per instance must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSample {
    pub bag: Vec<usize>,
    pub bag_features: BagFeatures,
    pub r: f64,
    pub label: Option<bool>,
    pub t_base: f64,
    pub t_bag: f64,
    /// Drawn by the model rather than at random.
    pub greedy: bool,
}

/// Everything collected for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceData {
    pub instance: String,
    pub pool: CutPool,
    pub stats: FeatureStats,
    pub t_base: f64,
    pub dropped: usize,
    pub samples: Vec<TrainingSample>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub instances: Vec<InstanceData>,
}

impl Dataset {
    pub fn num_samples(&self) -> usize {
        self.instances.iter().map(|d| d.samples.len()).sum()
    }

    /// Label every instance independently.
    pub fn assign_labels(&mut self, lambda_percent: f64) {
        for d in &mut self.instances {
            assign_labels(&mut d.samples, lambda_percent);
        }
    }

    /// Append a later collection round. With `relabel`, each touched
    /// instance is relabelled over all its samples; otherwise only the new
    /// samples are labelled, among themselves.
    pub fn merge_round(&mut self, round: Dataset, lambda_percent: f64, relabel: bool) {
        for mut new in round.instances {
            if !relabel {
                assign_labels(&mut new.samples, lambda_percent);
            }
            match self.instances.iter_mut().find(|d| d.instance == new.instance) {
                Some(d) => {
                    d.samples.extend(new.samples);
                    d.dropped += new.dropped;
                    if relabel {
                        assign_labels(&mut d.samples, lambda_percent);
                    }
                }
                None => {
                    if relabel {
                        assign_labels(&mut new.samples, lambda_percent);
                    }
                    self.instances.push(new);
                }
            }
        }
    }
}

/// Label the top `ceil(lambda% * h)` feedbacks 1, the rest 0; ties go to
/// earlier samples.
pub fn assign_labels(samples: &mut [TrainingSample], lambda_percent: f64) {
    let k = top_k_count(samples.len(), lambda_percent);
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_by(|&a, &b| samples[b].r.total_cmp(&samples[a].r).then(a.cmp(&b)));
    for (rank, &i) in idx.iter().enumerate() {
        samples[i].label = Some(rank < k);
    }
}

fn stream(seed: u64, instance_seed: u64, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ instance_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(salt);
    rng
}

const SUBSET_STREAM: u64 = 1;
const COIN_STREAM: u64 = 2;

fn collect(
    inst: &MipInstance,
    model: Option<&MlpParams>,
    cfg: &TrainConfig,
    bnc: &BncConfig,
) -> Result<InstanceData> {
    cfg.validate()?;
    let bnc = BncConfig {
        feedback_mode: cfg.feedback_mode,
        ..bnc.clone()
    };
    let root = prepare_root(inst, &bnc.cutgen)?;
    if root.pool.is_empty() {
        return Err(Error::Invalid(format!("`{}` has an empty candidate pool", inst.name)));
    }
    let raw: Vec<CutFeatures> = root
        .pool
        .cuts
        .iter()
        .map(|c| compute_cut_features(c, &root.property))
        .collect();
    let stats = zscore_fit(&raw)?;
    let normalized: Vec<CutFeatures> = raw.iter().map(|f| zscore_apply(f, &stats)).collect();

    let base = solve_with_cuts(inst, &root, &[], &bnc)?;
    if !base.solved() {
        return Err(Error::Validation(format!(
            "baseline solve of `{}` did not finish ({})",
            inst.name, base.status
        )));
    }
    let t_base = base.effort(bnc.feedback_mode)?;

    let l = root.pool.len();
    let k = top_k_count(l, cfg.k_percent);
    let greedy_bag = match model {
        Some(m) => {
            let scores: Vec<f64> = normalized.iter().map(|f| m.score(f)).collect();
            Some(select_top_k(&scores, cfg.k_percent)?)
        }
        None => None,
    };
    let mut subset_rng = stream(cfg.seed, inst.seed, SUBSET_STREAM);
    let mut coin_rng = stream(cfg.seed, inst.seed, COIN_STREAM);
    let cache_ok = bnc.feedback_mode == FeedbackMode::DeterministicWork;
    let mut cache: HashMap<Vec<usize>, Option<f64>> = HashMap::new();

    let mut samples = Vec::with_capacity(cfg.bags_per_instance);
    let mut dropped = 0;
    for _ in 0..cfg.bags_per_instance {
        let (bag, greedy) = match &greedy_bag {
            Some(g) if coin_rng.gen::<f64>() >= cfg.epsilon => (g.clone(), true),
            _ => {
                let mut b = index::sample(&mut subset_rng, l, k).into_vec();
                b.sort_unstable();
                (b, false)
            }
        };
        let t_bag = match cache.get(&bag) {
            Some(&t) if cache_ok => t,
            _ => {
                let t = match solve_with_cuts(inst, &root, &bag, &bnc) {
                    Ok(rep) if rep.solved() => Some(rep.effort(bnc.feedback_mode)?),
                    Ok(rep) => {
                        warn!("`{}`: bag {:?} dropped ({})", inst.name, bag, rep.status);
                        None
                    }
                    Err(e) => {
                        warn!("`{}`: bag {:?} dropped: {e}", inst.name, bag);
                        None
                    }
                };
                if cache_ok {
                    cache.insert(bag.clone(), t);
                }
                t
            }
        };
        let Some(t_bag) = t_bag else {
            dropped += 1;
            continue;
        };
        let members: Vec<CutFeatures> = bag.iter().map(|&i| normalized[i]).collect();
        samples.push(TrainingSample {
            bag_features: bag_features(&members)?,
            bag,
            r: reduction_ratio(t_base, t_bag),
            label: None,
            t_base,
            t_bag,
            greedy,
        });
    }
    debug!("`{}`: {} samples, {} dropped", inst.name, samples.len(), dropped);
    Ok(InstanceData {
        instance: inst.name.clone(),
        pool: root.pool,
        stats,
        t_base,
        dropped,
        samples,
    })
}

/// Uniform random bags of size `ceil(K% * l)`.
pub fn collect_random(inst: &MipInstance, cfg: &TrainConfig, bnc: &BncConfig) -> Result<InstanceData> {
    collect(inst, None, cfg, bnc)
}

/// Epsilon-greedy bags: the model's top-K% with probability `1 - epsilon`,
/// otherwise a random bag drawn from the same stream `collect_random` uses.
pub fn collect_active(
    inst: &MipInstance,
    model: &MlpParams,
    cfg: &TrainConfig,
    bnc: &BncConfig,
) -> Result<InstanceData> {
    model.validate()?;
    collect(inst, Some(model), cfg, bnc)
}

/// Collect over many instances in parallel; instances that cannot yield
/// samples (empty pool, unfinished baseline) are skipped with a warning.
pub fn collect_dataset(
    instances: &[MipInstance],
    model: Option<&MlpParams>,
    cfg: &TrainConfig,
    bnc: &BncConfig,
) -> Result<Dataset> {
    cfg.validate()?;
    let parts: Vec<Option<InstanceData>> = instances
        .par_iter()
        .map(|inst| match collect(inst, model, cfg, bnc) {
            Ok(d) if !d.samples.is_empty() => Some(d),
            Ok(_) => {
                warn!("`{}`: every bag was dropped", inst.name);
                None
            }
            Err(e) => {
                warn!("`{}` skipped: {e}", inst.name);
                None
            }
        })
        .collect();
    Ok(Dataset {
        instances: parts.into_iter().flatten().collect(),
    })
}

/// Cross-entropy sum, squared L2 norm and the gradient (flattened in
/// `MlpParams::flatten` order) of `sum CE + gamma * reg_scale * Omega`.
pub fn loss_and_grad(
    params: &MlpParams,
    xs: &[[f64; NUM_FEATURES]],
    ys: &[bool],
    gamma: f64,
    reg_scale: f64,
) -> (f64, f64, Vec<f64>) {
    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = params
        .layers
        .iter()
        .map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()]))
        .collect();
    let mut ce = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let t = params.trace(x);
        let p = t.acts.last().unwrap();
        let target = usize::from(y);
        ce -= p[target].max(f64::MIN_POSITIVE).ln();
        let mut delta: Vec<f64> = p.clone();
        delta[target] -= 1.0;
        for li in (0..params.layers.len()).rev() {
            let layer = &params.layers[li];
            let input = &t.acts[li];
            let (gw, gb) = &mut grads[li];
            for o in 0..layer.n_out {
                gb[o] += delta[o];
                for k in 0..layer.n_in {
                    gw[o * layer.n_in + k] += delta[o] * input[k];
                }
            }
            if li > 0 {
                delta = (0..layer.n_in)
                    .map(|k| {
                        let back: f64 = (0..layer.n_out)
                            .map(|o| layer.w[o * layer.n_in + k] * delta[o])
                            .sum();
                        back * (1.0 - input[k] * input[k])
                    })
                    .collect();
            }
        }
    }
    let omega = params.l2();
    let mut flat = Vec::with_capacity(params.num_params());
    for (gw, gb) in grads {
        flat.extend(gw);
        flat.extend(gb);
    }
    let theta = params.flatten();
    let c = 2.0 * gamma * reg_scale;
    for (g, t) in flat.iter_mut().zip(&theta) {
        *g += c * t;
    }
    (ce, omega, flat)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub ce: f64,
    pub omega: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub trace: Vec<EpochLoss>,
}

/// Labelled training pairs in instance order.
pub fn training_pairs(data: &Dataset) -> Result<(Vec<[f64; NUM_FEATURES]>, Vec<bool>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for d in &data.instances {
        for s in &d.samples {
            let y = s.label.ok_or_else(|| {
                Error::Validation(format!("unlabelled sample in `{}`", d.instance))
            })?;
            xs.push(s.bag_features.to_array());
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(Error::Validation("no training samples".into()));
    }
    Ok((xs, ys))
}

fn full_loss(params: &MlpParams, xs: &[[f64; NUM_FEATURES]], ys: &[bool]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| {
            let p = params.trace(x).acts.pop().unwrap();
            -p[usize::from(y)].max(f64::MIN_POSITIVE).ln()
        })
        .sum()
}

/// Mini-batch gradient descent on `L = sum CE + gamma * ||theta||^2`. Each
/// batch carries its share `|B| / N` of the penalty so that one epoch of
/// batches accounts for `L` exactly once. The trace records `L` after
/// every epoch.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (xs, ys) = training_pairs(data)?;
    train_on(&xs, &ys, cfg)
}

pub fn train_on(xs: &[[f64; NUM_FEATURES]], ys: &[bool], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut params = MlpParams::glorot(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(3);
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut theta = params.flatten();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let bx: Vec<[f64; NUM_FEATURES]> = chunk.iter().map(|&i| xs[i]).collect();
            let by: Vec<bool> = chunk.iter().map(|&i| ys[i]).collect();
            let (_, _, g) = loss_and_grad(&params, &bx, &by, cfg.gamma, chunk.len() as f64 / n as f64);
            for (t, gi) in theta.iter_mut().zip(&g) {
                *t -= cfg.learning_rate * gi;
            }
            params.unflatten(&theta);
        }
        let ce = full_loss(&params, xs, ys);
        let omega = params.l2();
        let total = ce + cfg.gamma * omega;
        if !total.is_finite() || theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Diverged(format!(
                "loss became non-finite at epoch {epoch}; try a learning rate below {}",
                cfg.learning_rate
            )));
        }
        trace.push(EpochLoss {
            epoch,
            ce,
            omega,
            total,
        });
    }
    Ok(TrainOutcome { params, trace })
}

pub fn accuracy(params: &MlpParams, xs: &[[f64; NUM_FEATURES]], ys: &[bool]) -> f64 {
    let hits = xs
        .iter()
        .zip(ys)
        .filter(|(x, &y)| (params.forward(&x[..]).map(|p| p.0).unwrap_or(0.5) > 0.5) == y)
        .count();
    hits as f64 / xs.len().max(1) as f64
}

pub const LOSS_HEADER: &str = "epoch,L_ce,omega,total";

pub fn loss_log_csv(trace: &[EpochLoss]) -> String {
    let mut s = String::from(LOSS_HEADER);
    s.push('\n');
    for e in trace {
        s.push_str(&format!("{},{:?},{:?},{:?}\n", e.epoch, e.ce, e.omega, e.total));
    }
    s
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

pub fn instance_data_to_string(d: &InstanceData) -> String {
    let mut s = format!("{DATASET_MAGIC}\ninstance {}\n", d.instance);
    s.push_str(&format!("t_base {:?}\ndropped {}\n", d.t_base, d.dropped));
    s.push_str(&format!("stats_mean {}\nstats_std {}\n", floats(&d.stats.mean), floats(&d.stats.std)));
    s.push_str(&format!("pool {}\n", d.pool.len()));
    for c in &d.pool.cuts {
        let src = c.source_row.map_or("-".to_string(), |r| r.to_string());
        s.push_str(&format!("cut {} {} {:?} {}", c.kind, src, c.beta, c.alpha.len()));
        for &(j, a) in &c.alpha {
            s.push_str(&format!(" {j} {a:?}"));
        }
        s.push('\n');
    }
    s.push_str(&format!("samples {}\n", d.samples.len()));
    for x in &d.samples {
        let label = match x.label {
            Some(true) => "1",
            Some(false) => "0",
            None => "-",
        };
        s.push_str(&format!(
            "sample {:?} {:?} {:?} {} {} {}",
            x.r,
            x.t_base,
            x.t_bag,
            label,
            u8::from(x.greedy),
            x.bag.len()
        ));
        for i in &x.bag {
            s.push_str(&format!(" {i}"));
        }
        s.push_str(&format!(" {}\n", floats(&x.bag_features.to_array())));
    }
    s.push_str("end\n");
    s
}

pub fn parse_instance_data(text: &str, source: &str) -> Result<InstanceData> {
    let mut lines = Lines::new(text, source);
    lines.expect(DATASET_MAGIC)?;
    let instance = lines.keyed("instance")?.to_string();
    let t_base: f64 = {
        let v = lines.keyed("t_base")?;
        lines.parse(v, "t_base")?
    };
    let dropped: usize = {
        let v = lines.keyed("dropped")?;
        lines.parse(v, "dropped count")?
    };
    let mut vec14 = |key: &str| -> Result<[f64; NUM_FEATURES]> {
        let v = lines.keyed(key)?;
        let t: Vec<&str> = v.split_whitespace().collect();
        if t.len() != NUM_FEATURES {
            return Err(lines.err(format!("`{key}` needs {NUM_FEATURES} values")));
        }
        let mut out = [0.0; NUM_FEATURES];
        for (o, tok) in out.iter_mut().zip(t) {
            *o = lines.parse(tok, key)?;
        }
        Ok(out)
    };
    let stats = FeatureStats {
        mean: vec14("stats_mean")?,
        std: vec14("stats_std")?,
    };
    let l: usize = {
        let v = lines.keyed("pool")?;
        lines.parse(v, "pool size")?
    };
    let mut cuts = Vec::with_capacity(l);
    for _ in 0..l {
        let t = lines.tokens()?;
        if t.len() < 5 || t[0] != "cut" {
            return Err(lines.err("expected `cut <kind> <row|-> <beta> <nnz> ...`"));
        }
        let kind: CutKind = t[1].parse().map_err(|_| lines.err(format!("bad cut kind `{}`", t[1])))?;
        let source_row = if t[2] == "-" { None } else { Some(lines.parse(t[2], "source row")?) };
        let beta: f64 = lines.parse(t[3], "beta")?;
        let nnz: usize = lines.parse(t[4], "nonzero count")?;
        if t.len() != 5 + 2 * nnz {
            return Err(lines.err(format!("cut declares {nnz} nonzeros")));
        }
        let mut alpha = Vec::with_capacity(nnz);
        for k in 0..nnz {
            alpha.push((lines.parse(t[5 + 2 * k], "column")?, lines.parse(t[6 + 2 * k], "coefficient")?));
        }
        cuts.push(Cut {
            alpha,
            beta,
            kind,
            source_row,
        });
    }
    let mut pool = CutPool::default();
    for c in cuts {
        match c.kind {
            CutKind::Gomory => pool.n_gomory += 1,
            CutKind::Cover => pool.n_cover += 1,
            CutKind::Clique => pool.n_clique += 1,
        }
        pool.cuts.push(c);
    }
    let h: usize = {
        let v = lines.keyed("samples")?;
        lines.parse(v, "sample count")?
    };
    let mut samples = Vec::with_capacity(h);
    for _ in 0..h {
        let t = lines.tokens()?;
        if t.len() < 7 || t[0] != "sample" {
            return Err(lines.err("expected `sample <r> <t_base> <t_bag> <label> <greedy> <k> ...`"));
        }
        let r: f64 = lines.parse(t[1], "feedback")?;
        let tb: f64 = lines.parse(t[2], "t_base")?;
        let tg: f64 = lines.parse(t[3], "t_bag")?;
        let label = match t[4] {
            "1" => Some(true),
            "0" => Some(false),
            "-" => None,
            other => return Err(lines.err(format!("bad label `{other}`"))),
        };
        let greedy = match t[5] {
            "1" => true,
            "0" => false,
            other => return Err(lines.err(format!("bad greedy flag `{other}`"))),
        };
        let k: usize = lines.parse(t[6], "bag size")?;
        if t.len() != 7 + k + NUM_FEATURES {
            return Err(lines.err(format!("sample declares a bag of {k}")));
        }
        let bag: Vec<usize> = t[7..7 + k]
            .iter()
            .map(|tok| lines.parse(tok, "bag index"))
            .collect::<Result<_>>()?;
        if k == 0 || bag.iter().any(|&i| i >= l) || bag.windows(2).any(|w| w[0] >= w[1]) {
            return Err(lines.err("bag indices must be distinct, ascending and inside the pool"));
        }
        let mut f = [0.0; NUM_FEATURES];
        for (o, tok) in f.iter_mut().zip(&t[7 + k..]) {
            *o = lines.parse(tok, "bag feature")?;
        }
        samples.push(TrainingSample {
            bag,
            bag_features: CutFeatures::from_array(f),
            r,
            label,
            t_base: tb,
            t_bag: tg,
            greedy,
        });
    }
    lines.expect("end")?;
    Ok(InstanceData {
        instance,
        pool,
        stats,
        t_base,
        dropped,
        samples,
    })
}

pub fn write_instance_data(d: &InstanceData, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, instance_data_to_string(d)).map_err(|e| Error::io(path, e))
}

pub fn read_instance_data(path: impl AsRef<Path>) -> Result<InstanceData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance_data(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(r: f64) -> TrainingSample {
        TrainingSample {
            bag: vec![0],
            bag_features: CutFeatures::default(),
            r,
            label: None,
            t_base: 1.0,
            t_bag: 1.0 - r,
            greedy: false,
        }
    }

    #[test]
    fn labels_top_half() {
        let mut s: Vec<_> = [0.3, 0.1, 0.4, 0.2].into_iter().map(sample).collect();
        assign_labels(&mut s, 50.0);
        let got: Vec<bool> = s.iter().map(|x| x.label.unwrap()).collect();
        assert_eq!(got, vec![true, false, true, false]);
    }

    #[test]
    fn labels_ties_go_first() {
        let mut s: Vec<_> = (0..5).map(|_| sample(0.0)).collect();
        assign_labels(&mut s, 50.0);
        let got: Vec<bool> = s.iter().map(|x| x.label.unwrap()).collect();
        assert_eq!(got, vec![true, true, true, false, false]);
    }

    #[test]
    fn unlabelled_data_is_rejected() {
        let d = Dataset {
            instances: vec![InstanceData {
                instance: "a".into(),
                pool: CutPool::default(),
                stats: FeatureStats::default(),
                t_base: 1.0,
                dropped: 0,
                samples: vec![sample(0.1)],
            }],
        };
        assert!(matches!(train(&d, &TrainConfig::default()), Err(Error::Validation(_))));
        assert!(train(&Dataset::default(), &TrainConfig::default()).is_err());
    }

    #[test]
    fn huge_learning_rate_is_reported() {
        let xs: Vec<[f64; NUM_FEATURES]> = (0..64).map(|i| [i as f64 * 1e3; NUM_FEATURES]).collect();
        let ys: Vec<bool> = (0..64).map(|i| i % 2 == 0).collect();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            epochs: 5,
            ..TrainConfig::default()
        };
        assert!(matches!(train_on(&xs, &ys, &cfg), Err(Error::Diverged(_))));
    }

    #[test]
    fn config_ranges() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        assert!(TrainConfig { lambda_percent: 100.0, ..ok.clone() }.validate().is_err());
        assert!(TrainConfig { epsilon: 1.5, ..ok.clone() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..ok }.validate().is_err());
    }
}
