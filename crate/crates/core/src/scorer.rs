//! Scoring function (14-30-15-2 tanh MLP with softmax output), the
//! hand-crafted baseline heuristics and top-K% selection.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutgen::{Cut, CutPool};
use crate::error::{Error, Result};
use crate::features::{
    self, compute_cut_features, zscore_apply, zscore_fit, CutFeatures, NUM_FEATURES,
};
use crate::model::{Lines, ProblemProperty};

pub const MODEL_MAGIC: &str = "CRNK1";
pub const ARCH: [usize; 4] = [NUM_FEATURES, 30, 15, 2];

/// Dense layer; `w` is row-major `n_out x n_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            w: vec![0.0; n_in * n_out],
            b: vec![0.0; n_out],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_out)
            .map(|o| {
                let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
                self.b[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

/// Per-layer pre-activations and activations of one forward pass.
#[derive(Clone, Debug)]
pub struct Activations {
    /// `acts[0]` is the input, `acts[i]` the output of layer `i - 1`
    /// (tanh for hidden layers, softmax probabilities for the last).
    pub acts: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

/// Network parameters. Output unit 1 is the positive class.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    pub fn zeros() -> Self {
        Self {
            layers: ARCH.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    /// Weights uniform in `+-sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn glorot(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros();
        for l in &mut p.layers {
            let r = (6.0 / (l.n_in + l.n_out) as f64).sqrt();
            for w in &mut l.w {
                *w = rng.gen_range(-r..=r);
            }
        }
        p
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let dims: Vec<(usize, usize)> = self.layers.iter().map(|l| (l.n_in, l.n_out)).collect();
        let want: Vec<(usize, usize)> = ARCH.windows(2).map(|w| (w[0], w[1])).collect();
        if dims != want {
            return Err(Error::Shape(format!("layer shapes {dims:?}, expected {want:?}")));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.w.len() != l.n_in * l.n_out || l.b.len() != l.n_out {
                return Err(Error::Shape(format!("layer {i} buffer sizes do not match")));
            }
            if l.w.iter().chain(&l.b).any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("layer {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Flat view in layer order, weights then biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            v.extend_from_slice(&l.w);
            v.extend_from_slice(&l.b);
        }
        v
    }

    pub fn unflatten(&mut self, v: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            let (nw, nb) = (l.w.len(), l.b.len());
            l.w.copy_from_slice(&v[k..k + nw]);
            l.b.copy_from_slice(&v[k + nw..k + nw + nb]);
            k += nw + nb;
        }
    }

    /// Squared L2 norm of all parameters.
    pub fn l2(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(&l.b))
            .map(|v| v * v)
            .sum()
    }

    pub fn trace(&self, x: &[f64]) -> Activations {
        let mut acts = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        let mut logits = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            let pre = l.apply(acts.last().unwrap());
            if i == last {
                acts.push(softmax(&pre));
                logits = pre;
            } else {
                acts.push(pre.iter().map(|v| v.tanh()).collect());
            }
        }
        Activations { acts, logits }
    }

    /// `(P(y=1|x), P(y=0|x))`.
    pub fn forward(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != NUM_FEATURES {
            return Err(Error::Shape(format!(
                "input has {} entries, expected {NUM_FEATURES}",
                x.len()
            )));
        }
        let p = self.trace(x).acts.pop().unwrap();
        Ok((p[1], p[0]))
    }

    pub fn score(&self, f: &CutFeatures) -> f64 {
        let p = self.trace(&f.to_array()).acts.pop().unwrap();
        p[1]
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn model_to_string(p: &MlpParams) -> String {
    let mut s = format!("{MODEL_MAGIC}\narch");
    for d in ARCH {
        s.push_str(&format!(" {d}"));
    }
    s.push('\n');
    let row = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    for (i, l) in p.layers.iter().enumerate() {
        s.push_str(&format!("layer {i} {} {}\n", l.n_out, l.n_in));
        for o in 0..l.n_out {
            s.push_str(&format!("w {}\n", row(&l.w[o * l.n_in..(o + 1) * l.n_in])));
        }
        s.push_str(&format!("b {}\n", row(&l.b)));
    }
    s.push_str("end\n");
    s
}

pub fn parse_model(text: &str, source: &str) -> Result<MlpParams> {
    let mut lines = Lines::new(text, source);
    lines.expect(MODEL_MAGIC)?;
    let arch = lines.keyed("arch")?;
    let dims: Vec<usize> = arch
        .split_whitespace()
        .map(|t| lines.parse(t, "layer width"))
        .collect::<Result<_>>()?;
    if dims != ARCH {
        return Err(Error::Shape(format!("{source}: architecture {dims:?}, expected {ARCH:?}")));
    }
    let mut p = MlpParams::zeros();
    for (i, l) in p.layers.iter_mut().enumerate() {
        let want = format!("layer {i} {} {}", l.n_out, l.n_in);
        let got = lines.next_line()?;
        if got.split_whitespace().ne(want.split_whitespace()) {
            return Err(lines.err(format!("expected `{want}`")));
        }
        let mut read = |key: &str, len: usize, out: &mut [f64]| -> Result<()> {
            let t = lines.tokens()?;
            if t.first() != Some(&key) || t.len() != len + 1 {
                return Err(lines.err(format!("expected `{key}` with {len} values")));
            }
            for (o, tok) in out.iter_mut().zip(&t[1..]) {
                *o = lines.parse(tok, "parameter")?;
            }
            Ok(())
        };
        for o in 0..l.n_out {
            read("w", l.n_in, &mut l.w[o * l.n_in..(o + 1) * l.n_in])?;
        }
        read("b", l.n_out, &mut l.b)?;
    }
    lines.expect("end")?;
    p.validate()?;
    Ok(p)
}

pub fn save_model(p: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(p)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, &path.display().to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    Violation,
    NormViolation,
    Distance,
    Parallelism,
}

/// Baseline score from raw geometry; higher is better.
pub fn heuristic_score(cut: &Cut, property: &ProblemProperty<'_>, h: Heuristic) -> f64 {
    let x = &property.x_lp_star;
    match h {
        Heuristic::Violation => cut.violation(x),
        Heuristic::NormViolation => features::norm_violation(cut, x),
        Heuristic::Distance => features::distance(cut, x),
        Heuristic::Parallelism => features::parallelism(cut, property.objective()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelectionPolicy {
    Random(u64),
    Violation,
    NormViolation,
    Distance,
    Parallelism,
    CutRanking(MlpParams),
}

impl SelectionPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionPolicy::Random(_) => "random",
            SelectionPolicy::Violation => "violation",
            SelectionPolicy::NormViolation => "norm_violation",
            SelectionPolicy::Distance => "distance",
            SelectionPolicy::Parallelism => "parallelism",
            SelectionPolicy::CutRanking(_) => "cut_ranking",
        }
    }

    /// Score every pool cut. Cut Ranking normalizes features with
    /// statistics fitted on this pool; `Random` mixes its seed with the
    /// instance seed so each instance gets its own draw.
    pub fn scores(&self, pool: &CutPool, property: &ProblemProperty<'_>) -> Result<Vec<f64>> {
        let h = match self {
            SelectionPolicy::Random(seed) => {
                let mix = seed ^ property.instance.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let mut rng = ChaCha8Rng::seed_from_u64(mix);
                return Ok(pool.cuts.iter().map(|_| rng.gen::<f64>()).collect());
            }
            SelectionPolicy::CutRanking(params) => {
                params.validate()?;
                if pool.is_empty() {
                    return Ok(Vec::new());
                }
                let raw: Vec<CutFeatures> = pool
                    .cuts
                    .iter()
                    .map(|c| compute_cut_features(c, property))
                    .collect();
                let stats = zscore_fit(&raw)?;
                return Ok(raw.iter().map(|f| params.score(&zscore_apply(f, &stats))).collect());
            }
            SelectionPolicy::Violation => Heuristic::Violation,
            SelectionPolicy::NormViolation => Heuristic::NormViolation,
            SelectionPolicy::Distance => Heuristic::Distance,
            SelectionPolicy::Parallelism => Heuristic::Parallelism,
        };
        Ok(pool.cuts.iter().map(|c| heuristic_score(c, property, h)).collect())
    }

    pub fn select(
        &self,
        pool: &CutPool,
        property: &ProblemProperty<'_>,
        k_percent: f64,
    ) -> Result<Vec<usize>> {
        let s = self.scores(pool, property)?;
        select_top_k(&s, k_percent)
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `ceil(K% * len)` with at least one for a nonempty list, computed so
/// that exact products (30% of 20) do not round up.
pub fn top_k_count(len: usize, k_percent: f64) -> usize {
    if len == 0 {
        return 0;
    }
    let c = (k_percent * len as f64 / 100.0 - 1e-9).ceil() as usize;
    c.clamp(1, len)
}

/// Indices of the `top_k_count` highest scores, ties to the lower index,
/// returned ascending. NaN scores rank last.
pub fn select_top_k(scores: &[f64], k_percent: f64) -> Result<Vec<usize>> {
    if !(k_percent > 0.0 && k_percent <= 100.0) {
        return Err(Error::Invalid(format!("K must lie in (0, 100], got {k_percent}")));
    }
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| key(scores[b]).total_cmp(&key(scores[a])).then(a.cmp(&b)));
    idx.truncate(top_k_count(scores.len(), k_percent));
    idx.sort_unstable();
    Ok(idx)
}
