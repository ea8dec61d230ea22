//! First-order gradient boosting: each round fits a least-squares tree to the
//! negative gradient on a row subsample and adds it with shrinkage.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::tree::{stable_mean, Tree, TreeParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
    pub min_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams { n_rounds: 100, learning_rate: 0.1, max_depth: 3, subsample: 0.8, min_leaf: 20 }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds < 1 {
            return Err(Error::config("n_rounds", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::config("learning_rate", "must lie in (0, 1]"));
        }
        if self.max_depth < 1 {
            return Err(Error::config("max_depth", "must be at least 1"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::config("subsample", "must lie in (0, 1]"));
        }
        if self.min_leaf < 1 {
            return Err(Error::config("min_leaf", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Raw score is a log-odds.
    Logistic,
    Squared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbt {
    pub loss: Loss,
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Gbt {
    pub fn fit(x: &Matrix, target: &[f64], loss: Loss, params: &GbtParams, seed: u64) -> Result<Gbt> {
        params.validate()?;
        let n = x.n_rows();
        let mean = stable_mean(target.iter().copied());
        let init = match loss {
            Loss::Squared => mean,
            Loss::Logistic => {
                let p = mean.clamp(1e-12, 1.0 - 1e-12);
                (p / (1.0 - p)).ln()
            }
        };
        let tree_params =
            TreeParams { max_depth: params.max_depth, min_leaf: params.min_leaf, features_per_split: x.n_cols() };
        let n_sub = ((params.subsample * n as f64).floor() as usize).clamp(1, n);

        let mut raw = vec![init; n];
        let mut residual = vec![0.0; n];
        let mut trees = Vec::with_capacity(params.n_rounds);
        for round in 0..params.n_rounds {
            for i in 0..n {
                residual[i] = match loss {
                    Loss::Squared => target[i] - raw[i],
                    Loss::Logistic => target[i] - sigmoid(raw[i]),
                };
            }
            let mut r = rng::stream(rng::derive(seed, round as u64));
            let rows = if n_sub == n {
                (0..n).collect()
            } else {
                let mut rows = sample(&mut r, n, n_sub).into_vec();
                rows.sort_unstable();
                rows
            };
            let tree = Tree::fit(x, &residual, rows, &tree_params, &mut r);
            for (i, v) in raw.iter_mut().enumerate() {
                *v += params.learning_rate * tree.predict_row(x.row(i));
            }
            trees.push(tree);
        }
        Ok(Gbt { loss, init, learning_rate: params.learning_rate, trees })
    }

    pub fn predict_raw(&self, x: &[f64]) -> f64 {
        self.trees.iter().fold(self.init, |acc, t| acc + self.learning_rate * t.predict_row(x))
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self.loss {
            Loss::Squared => self.predict_raw(x),
            Loss::Logistic => sigmoid(self.predict_raw(x)),
        }
    }
}
