use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Train/holdout partition with equal treated and control counts in train.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Dataset,
    pub holdout: Dataset,
    /// Source row of each train row, ascending.
    pub train_indices: Vec<usize>,
    /// Source row of each holdout row, ascending.
    pub holdout_indices: Vec<usize>,
    pub seed: u64,
}

/// Draws `m = min(floor(f*n_treated), floor(f*n_control))` rows uniformly from
/// each arm for training; every other row goes to the holdout.
pub fn balanced_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitResult> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::config("train_fraction", format!("must lie in (0, 1), got {train_fraction}")));
    }
    let (mut treated, mut control) = ds.arm_indices();
    if treated.len() < 2 || control.len() < 2 {
        return Err(Error::TooFewRows { needed: 2, treated: treated.len(), control: control.len() });
    }
    let m_t = (train_fraction * treated.len() as f64).floor() as usize;
    let m_c = (train_fraction * control.len() as f64).floor() as usize;
    let m = m_t.min(m_c);
    if m == 0 {
        return Err(Error::InvalidData(format!(
            "train_fraction {train_fraction} leaves an empty balanced train set ({} treated, {} control)",
            treated.len(),
            control.len()
        )));
    }

    let mut r = rng::stream(rng::derive_str(seed, "treated"));
    treated.partial_shuffle(&mut r, m);
    let mut r = rng::stream(rng::derive_str(seed, "control"));
    control.partial_shuffle(&mut r, m);

    let mut in_train = vec![false; ds.n_rows()];
    for &i in treated[..m].iter().chain(&control[..m]) {
        in_train[i] = true;
    }
    let (train_indices, holdout_indices): (Vec<usize>, Vec<usize>) = (0..ds.n_rows()).partition(|&i| in_train[i]);
    Ok(SplitResult {
        train: ds.subset(&train_indices),
        holdout: ds.subset(&holdout_indices),
        train_indices,
        holdout_indices,
        seed,
    })
}
