//! The 14 atomic cut features, per-instance Z-score normalization and the
//! bag map (component-wise mean).
//!
//! | index | name                 |
//! |-------|----------------------|
//! | 0     | coef_mean            |
//! | 1     | coef_max             |
//! | 2     | coef_min             |
//! | 3     | coef_std             |
//! | 4     | obj_mean             |
//! | 5     | obj_max              |
//! | 6     | obj_min              |
//! | 7     | obj_std              |
//! | 8     | support              |
//! | 9     | integral_support     |
//! | 10    | norm_violation       |
//! | 11    | distance             |
//! | 12    | parallelism          |
//! | 13    | expected_improvement |

use std::path::Path;

use crate::cutgen::Cut;
use crate::error::{Error, Result};
use crate::model::ProblemProperty;

pub const NUM_FEATURES: usize = 14;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "coef_mean",
    "coef_max",
    "coef_min",
    "coef_std",
    "obj_mean",
    "obj_max",
    "obj_min",
    "obj_std",
    "support",
    "integral_support",
    "norm_violation",
    "distance",
    "parallelism",
    "expected_improvement",
];

/// |beta| below this uses `max(|beta|, 1)` as the normalizing denominator.
pub const BETA_EPS: f64 = 1e-9;
/// Standard deviations below this are treated as 1.
pub const STD_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CutFeatures {
    pub coef_mean: f64,
    pub coef_max: f64,
    pub coef_min: f64,
    pub coef_std: f64,
    pub obj_mean: f64,
    pub obj_max: f64,
    pub obj_min: f64,
    pub obj_std: f64,
    pub support: f64,
    pub integral_support: f64,
    pub norm_violation: f64,
    pub distance: f64,
    pub parallelism: f64,
    pub expected_improvement: f64,
}

/// Bag features share the layout of cut features.
pub type BagFeatures = CutFeatures;

impl CutFeatures {
    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.coef_mean,
            self.coef_max,
            self.coef_min,
            self.coef_std,
            self.obj_mean,
            self.obj_max,
            self.obj_min,
            self.obj_std,
            self.support,
            self.integral_support,
            self.norm_violation,
            self.distance,
            self.parallelism,
            self.expected_improvement,
        ]
    }

    pub fn from_array(v: [f64; NUM_FEATURES]) -> Self {
        Self {
            coef_mean: v[0],
            coef_max: v[1],
            coef_min: v[2],
            coef_std: v[3],
            obj_mean: v[4],
            obj_max: v[5],
            obj_min: v[6],
            obj_std: v[7],
            support: v[8],
            integral_support: v[9],
            norm_violation: v[10],
            distance: v[11],
            parallelism: v[12],
            expected_improvement: v[13],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Population mean, max, min and (1/N) standard deviation.
fn stats(values: &[f64]) -> (f64, f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, max, min, var.sqrt())
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|a| a * a).sum::<f64>().sqrt()
}

/// `max(0, (alpha . x* - beta) / |beta|)`, guarded at `beta = 0`.
pub fn norm_violation(cut: &Cut, x: &[f64]) -> f64 {
    let denom = if cut.beta.abs() < BETA_EPS {
        cut.beta.abs().max(1.0)
    } else {
        cut.beta.abs()
    };
    (cut.violation(x) / denom).max(0.0)
}

/// Euclidean distance from `x*` to the cut hyperplane.
pub fn distance(cut: &Cut, x: &[f64]) -> f64 {
    cut.violation(x).abs() / norm(cut.alpha.iter().map(|a| a.1))
}

/// Cosine between the objective and the cut normal; 0 for a zero objective.
pub fn parallelism(cut: &Cut, z: &[f64]) -> f64 {
    let zn = norm(z.iter().copied());
    if zn == 0.0 {
        return 0.0;
    }
    let dot: f64 = cut.alpha.iter().map(|&(j, a)| a * z[j]).sum();
    (dot / (zn * norm(cut.alpha.iter().map(|a| a.1)))).clamp(-1.0, 1.0)
}

pub fn expected_improvement(cut: &Cut, z: &[f64], x: &[f64]) -> f64 {
    norm(z.iter().copied()) * distance(cut, x)
}

pub fn compute_cut_features(cut: &Cut, property: &ProblemProperty<'_>) -> CutFeatures {
    let inst = property.instance;
    let z = property.objective();
    let x = &property.x_lp_star;
    let n = property.num_vars();

    let coefs: Vec<f64> = cut.alpha.iter().map(|a| a.1).collect();
    let objs: Vec<f64> = cut.alpha.iter().map(|&(j, _)| z[j]).collect();
    let (coef_mean, coef_max, coef_min, coef_std) = stats(&coefs);
    let (obj_mean, obj_max, obj_min, obj_std) = stats(&objs);
    let nnz = cut.alpha.len();
    let nnz_int = cut.alpha.iter().filter(|&&(j, _)| inst.integer[j]).count();

    CutFeatures {
        coef_mean,
        coef_max,
        coef_min,
        coef_std,
        obj_mean,
        obj_max,
        obj_min,
        obj_std,
        support: nnz as f64 / n as f64,
        integral_support: if nnz == 0 { 0.0 } else { nnz_int as f64 / nnz as f64 },
        norm_violation: norm_violation(cut, x),
        distance: distance(cut, x),
        parallelism: parallelism(cut, z),
        expected_improvement: expected_improvement(cut, z, x),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureStats {
    pub mean: [f64; NUM_FEATURES],
    pub std: [f64; NUM_FEATURES],
}

impl Default for FeatureStats {
    /// The identity transform.
    fn default() -> Self {
        Self {
            mean: [0.0; NUM_FEATURES],
            std: [1.0; NUM_FEATURES],
        }
    }
}

pub fn zscore_fit(vectors: &[CutFeatures]) -> Result<FeatureStats> {
    if vectors.is_empty() {
        return Err(Error::Invalid("z-score fit on an empty population".into()));
    }
    let mut out = FeatureStats::default();
    for d in 0..NUM_FEATURES {
        let col: Vec<f64> = vectors.iter().map(|v| v.to_array()[d]).collect();
        let (mean, _, _, std) = stats(&col);
        out.mean[d] = mean;
        out.std[d] = std;
    }
    Ok(out)
}

pub fn zscore_apply(v: &CutFeatures, stats: &FeatureStats) -> CutFeatures {
    let a = v.to_array();
    let mut out = [0.0; NUM_FEATURES];
    for d in 0..NUM_FEATURES {
        let s = if stats.std[d] < STD_EPS { 1.0 } else { stats.std[d] };
        out[d] = (a[d] - stats.mean[d]) / s;
    }
    CutFeatures::from_array(out)
}

pub fn bag_features(members: &[CutFeatures]) -> Result<BagFeatures> {
    if members.is_empty() {
        return Err(Error::EmptyBag);
    }
    let mut sum = [0.0; NUM_FEATURES];
    for m in members {
        for (s, v) in sum.iter_mut().zip(m.to_array()) {
            *s += v;
        }
    }
    let k = members.len() as f64;
    Ok(CutFeatures::from_array(sum.map(|s| s / k)))
}

pub fn features_to_csv(rows: &[CutFeatures]) -> String {
    let mut s = FEATURE_NAMES.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.to_array().iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn features_from_csv(text: &str, source: &str) -> Result<Vec<CutFeatures>> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    if header.split(',').map(str::trim).ne(FEATURE_NAMES) {
        return Err(Error::parse(source, 1, "header does not match the feature names"));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != NUM_FEATURES {
            return Err(Error::parse(
                source,
                i + 1,
                format!("expected {NUM_FEATURES} columns, found {}", cells.len()),
            ));
        }
        let mut v = [0.0; NUM_FEATURES];
        for (d, c) in cells.iter().enumerate() {
            v[d] = c
                .trim()
                .parse()
                .map_err(|_| Error::parse(source, i + 1, format!("bad number `{c}`")))?;
        }
        out.push(CutFeatures::from_array(v));
    }
    Ok(out)
}

pub fn write_features_csv(rows: &[CutFeatures], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, features_to_csv(rows)).map_err(|e| Error::io(path, e))
}
