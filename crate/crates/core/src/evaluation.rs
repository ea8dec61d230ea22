//! Targeting evaluation: rank holdout rows by predicted ITE, keep the top
//! fraction, and measure the realized treatment effect of that subset.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{balanced_split, Dataset};
use crate::error::{Error, Result};
use crate::meta::IteScores;
use crate::method::MethodSpec;
use crate::rng;

/// Mean treated outcome minus mean control outcome over `indices`.
pub fn realized_ate(ds: &Dataset, indices: &[usize]) -> Result<f64> {
    let (mut nt, mut st, mut nc, mut sc) = (0usize, 0usize, 0usize, 0usize);
    for &i in indices {
        let y = usize::from(ds.outcome()[i]);
        if ds.treatment()[i] {
            nt += 1;
            st += y;
        } else {
            nc += 1;
            sc += y;
        }
    }
    if nt == 0 || nc == 0 {
        return Err(Error::DegenerateSelection { treated: nt, control: nc });
    }
    Ok(st as f64 / nt as f64 - sc as f64 / nc as f64)
}

/// Total effect of a targeted group: `ate * n`.
pub fn tte(ate: f64, n: usize) -> f64 {
    ate * n as f64
}

/// Row indices by descending score, ties by ascending index.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// `ceil(fraction * n)` rows with the highest scores, in descending order.
pub fn select_top(scores: &[f64], fraction: f64) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::InvalidData("no scores to select from".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config("fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    let n = scores.len();
    // absorb representation error such as 0.3 * 10 = 3.0000000000000004
    let k = ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut ranked = rank_descending(scores);
    ranked.truncate(k);
    Ok(ranked)
}

/// Decile (1 = highest scores) of each row: rank `r` (1-based) lands in bin `ceil(10 r / n)`.
pub fn decile_bins(scores: &[f64]) -> Result<Vec<u8>> {
    let n = scores.len();
    if n < 10 {
        return Err(Error::InvalidData(format!("decile binning needs at least 10 rows, got {n}")));
    }
    let mut bins = vec![0u8; n];
    for (r, i) in rank_descending(scores).into_iter().enumerate() {
        bins[i] = ((10 * (r + 1)).div_ceil(n)) as u8;
    }
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetingResult {
    pub selected_indices: Vec<usize>,
    pub ate: f64,
    pub tte: f64,
    pub n_selected: usize,
    pub n_selected_treated: usize,
    pub n_selected_control: usize,
}

/// Select the top `fraction` of `holdout` by `scores.ranking()` and measure it.
pub fn evaluate_targeting(holdout: &Dataset, scores: &IteScores, fraction: f64) -> Result<TargetingResult> {
    if scores.len() != holdout.n_rows() {
        return Err(Error::InvalidData(format!("{} scores for {} holdout rows", scores.len(), holdout.n_rows())));
    }
    let selected = select_top(scores.ranking(), fraction)?;
    let ate = realized_ate(holdout, &selected)?;
    let n_t = selected.iter().filter(|&&i| holdout.treatment()[i]).count();
    Ok(TargetingResult {
        n_selected: selected.len(),
        n_selected_treated: n_t,
        n_selected_control: selected.len() - n_t,
        tte: tte(ate, selected.len()),
        ate,
        selected_indices: selected,
    })
}

fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Two-sided Student-t interval `mean ± t_{(1+level)/2, n-1} * sd / sqrt(n)`.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidData(format!("confidence interval needs at least 2 samples, got {}", samples.len())));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config("ci_level", format!("must lie in (0, 1), got {level}")));
    }
    let n = samples.len() as f64;
    let m = mean(samples);
    let sd = (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Ok((m, m));
    }
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::Numeric(e.to_string()))?
        .inverse_cdf(0.5 + level / 2.0);
    let half = t * sd / n.sqrt();
    Ok((m - half, m + half))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    /// Lower whisker end: smallest non-outlier.
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Upper whisker end: largest non-outlier.
    pub max: f64,
    /// Values outside `[q1 - 1.5 IQR, q3 + 1.5 IQR]`, ascending.
    pub outliers: Vec<f64>,
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn boxplot_stats(samples: &[f64]) -> Result<BoxplotStats> {
    if samples.is_empty() {
        return Err(Error::InvalidData("boxplot needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let (inside, outliers): (Vec<f64>, Vec<f64>) = sorted.iter().partition(|&&v| v >= lo_fence && v <= hi_fence);
    Ok(BoxplotStats { min: inside[0], q1, median, q3, max: inside[inside.len() - 1], outliers })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_iter: usize,
    pub fraction: f64,
    pub train_fraction: f64,
    pub ci_level: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { n_iter: 20, fraction: 0.3, train_fraction: 0.5, ci_level: 0.95 }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter < 2 {
            return Err(Error::config("n_iter", format!("must be at least 2, got {}", self.n_iter)));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::config("fraction", format!("must lie in (0, 1], got {}", self.fraction)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction", format!("must lie in (0, 1), got {}", self.train_fraction)));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::config("ci_level", format!("must lie in (0, 1), got {}", self.ci_level)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellResult {
    pub ate: f64,
    pub tte: f64,
    pub n_selected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method_id: String,
    /// One entry per iteration; `None` where the cell failed.
    pub iterations: Vec<Option<CellResult>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutIteration {
    pub iteration: usize,
    pub n_rows: usize,
    /// Untargeted ATE of the whole holdout.
    pub ate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub method_id: String,
    pub iteration: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: CvConfig,
    pub seed: u64,
    pub methods: Vec<MethodResult>,
    pub holdout: Vec<HoldoutIteration>,
    pub failures: Vec<CellFailure>,
}

impl MethodResult {
    pub fn ates(&self) -> Vec<f64> {
        self.iterations.iter().flatten().map(|c| c.ate).collect()
    }

    pub fn ttes(&self) -> Vec<f64> {
        self.iterations.iter().flatten().map(|c| c.tte).collect()
    }

    pub fn mean_ate(&self) -> Option<f64> {
        let v = self.ates();
        (!v.is_empty()).then(|| mean(&v))
    }
}

impl EvalReport {
    pub fn method(&self, id: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method_id == id)
    }
}

/// Keep at most `cap / 2` rows per arm, chosen uniformly.
fn cap_train(train: &Dataset, cap: usize, seed: u64) -> Dataset {
    if train.n_rows() <= cap {
        return train.subset(&(0..train.n_rows()).collect::<Vec<_>>());
    }
    use rand::seq::SliceRandom;
    let per_arm = cap / 2;
    let (mut t, mut c) = train.arm_indices();
    let mut r = rng::stream(seed);
    t.shuffle(&mut r);
    c.shuffle(&mut r);
    let mut keep: Vec<usize> = t.into_iter().take(per_arm).chain(c.into_iter().take(per_arm)).collect();
    keep.sort_unstable();
    train.subset(&keep)
}

fn run_cell(method: &MethodSpec, train: &Dataset, holdout: &Dataset, fraction: f64, seed: u64, iteration: u64) -> Result<CellResult> {
    let fit_seed = rng::derive(rng::derive_str(seed, &method.id), iteration);
    let capped;
    let train = match method.train_cap {
        Some(cap) => {
            capped = cap_train(train, cap, rng::derive(rng::derive_str(seed, &format!("cap:{}", method.id)), iteration));
            &capped
        }
        None => train,
    };
    let model = method.fit(train, fit_seed)?;
    let scores = model.predict(holdout.features())?;
    let t = evaluate_targeting(holdout, &scores, fraction)?;
    Ok(CellResult { ate: t.ate, tte: t.tte, n_selected: t.n_selected })
}

/// Seed of the balanced split used in `iteration` of a run seeded with `seed`.
pub fn split_seed(seed: u64, iteration: usize) -> u64 {
    rng::derive(rng::derive_str(seed, "split"), iteration as u64)
}

/// Repeated balanced split / fit / target / measure. Every method sees the
/// same split within an iteration; failed cells are recorded, not fatal.
pub fn cross_validate(ds: &Dataset, methods: &[MethodSpec], config: &CvConfig, seed: u64) -> Result<EvalReport> {
    config.validate()?;
    if methods.is_empty() {
        return Err(Error::config("methods", "at least one method is required"));
    }
    let per_iteration: Vec<Result<(HoldoutIteration, Vec<Result<CellResult>>)>> = (0..config.n_iter)
        .into_par_iter()
        .map(|i| {
            let split = balanced_split(ds, config.train_fraction, split_seed(seed, i))?;
            let all: Vec<usize> = (0..split.holdout.n_rows()).collect();
            let holdout = HoldoutIteration { iteration: i, n_rows: split.holdout.n_rows(), ate: realized_ate(&split.holdout, &all).ok() };
            let cells = methods
                .iter()
                .map(|m| run_cell(m, &split.train, &split.holdout, config.fraction, seed, i as u64))
                .collect();
            Ok((holdout, cells))
        })
        .collect();

    let mut methods_out: Vec<MethodResult> =
        methods.iter().map(|m| MethodResult { method_id: m.id.clone(), iterations: Vec::new() }).collect();
    let mut holdout = Vec::new();
    let mut failures = Vec::new();
    for (i, it) in per_iteration.into_iter().enumerate() {
        let (h, cells) = it?;
        holdout.push(h);
        for (m, cell) in methods_out.iter_mut().zip(cells) {
            match cell {
                Ok(c) => m.iterations.push(Some(c)),
                Err(e) => {
                    failures.push(CellFailure { method_id: m.method_id.clone(), iteration: i, message: e.to_string() });
                    m.iterations.push(None);
                }
            }
        }
    }
    Ok(EvalReport { config: config.clone(), seed, methods: methods_out, holdout, failures })
}
