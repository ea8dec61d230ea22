use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{stable_mean, Tree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    /// `None` means ceil(sqrt(d)).
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: 10, min_leaf: 20, bootstrap: true, features_per_split: None }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::config("n_trees", "must be at least 1"));
        }
        if self.min_leaf < 1 {
            return Err(Error::config("min_leaf", "must be at least 1"));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::config("features_per_split", "must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn sqrt_features(d: usize) -> usize {
    ((d as f64).sqrt().ceil() as usize).max(1)
}

/// Bagged least-squares trees; prediction is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn from_trees(trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidData("forest needs at least one tree".into()));
        }
        Ok(Forest { trees })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Tree `i` draws from its own stream `derive(seed, i)`, so the result is
    /// independent of how trees are scheduled across threads.
    pub fn fit(x: &Matrix, target: &[f64], params: &ForestParams, seed: u64) -> Result<Forest> {
        params.validate()?;
        let n = x.n_rows();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_leaf: params.min_leaf,
            features_per_split: params.features_per_split.unwrap_or_else(|| sqrt_features(x.n_cols())),
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(rng::derive(seed, i as u64));
                let rows: Vec<usize> =
                    if params.bootstrap { (0..n).map(|_| r.gen_range(0..n)).collect() } else { (0..n).collect() };
                Tree::fit(x, target, rows, &tree_params, &mut r)
            })
            .collect();
        Ok(Forest { trees })
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        stable_mean(self.trees.iter().map(|t| t.predict_row(x)))
    }
}
