//! L2-regularized logistic regression fit by full-batch gradient descent with
//! Armijo backtracking. The intercept is not penalized.

use serde::{Deserialize, Serialize};

use super::gbt::sigmoid;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogitParams {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogitParams {
    fn default() -> Self {
        LogitParams { lambda: 1e-4, tol: 1e-8, max_iter: 10_000 }
    }
}

impl LogitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda", "must be finite and non-negative"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("tol", "must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::config("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogitModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        sigmoid(self.intercept + dot(&self.weights, x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood plus `lambda/2 * |w|^2`.
///
/// Parameters are packed as `[w_0, .., w_{d-1}, intercept]`.
pub struct LogisticObjective<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    lambda: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a Matrix, y: &'a [f64], lambda: f64) -> Self {
        LogisticObjective { x, y, lambda }
    }

    fn margin(&self, theta: &[f64], i: usize) -> f64 {
        let d = self.x.n_cols();
        theta[d] + dot(&theta[..d], self.x.row(i))
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let d = self.x.n_cols();
        let n = self.x.n_rows() as f64;
        let nll: f64 = (0..self.x.n_rows())
            .map(|i| {
                let z = self.margin(theta, i);
                softplus(z) - self.y[i] * z
            })
            .sum();
        nll / n + 0.5 * self.lambda * theta[..d].iter().map(|w| w * w).sum::<f64>()
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.x.n_cols();
        let n = self.x.n_rows() as f64;
        let mut g = vec![0.0; d + 1];
        for i in 0..self.x.n_rows() {
            let r = sigmoid(self.margin(theta, i)) - self.y[i];
            for (gj, xj) in g[..d].iter_mut().zip(self.x.row(i)) {
                *gj += r * xj;
            }
            g[d] += r;
        }
        for j in 0..d {
            g[j] = g[j] / n + self.lambda * theta[j];
        }
        g[d] /= n;
        g
    }
}

pub fn fit(x: &Matrix, y: &[f64], params: &LogitParams) -> Result<LogitModel> {
    params.validate()?;
    let d = x.n_cols();
    let obj = LogisticObjective::new(x, y, params.lambda);
    let rate = (y.iter().sum::<f64>() / y.len() as f64).clamp(1e-12, 1.0 - 1e-12);
    let mut theta = vec![0.0; d + 1];
    theta[d] = (rate / (1.0 - rate)).ln();

    let mut f = obj.value(&theta);
    let mut step = 1.0;
    for _ in 0..params.max_iter {
        let g = obj.gradient(&theta);
        let gn2: f64 = g.iter().map(|v| v * v).sum();
        if gn2.sqrt() < params.tol {
            break;
        }
        // grow the trial step a little each iteration, then backtrack
        step *= 2.0;
        let mut accepted = false;
        while step > 1e-20 {
            let trial: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let ft = obj.value(&trial);
            // strict decrease: near the optimum the Armijo margin can round away,
            // and accepting equal values would then spin until the iteration cap
            if ft < f && ft <= f - 0.5 * step * gn2 {
                theta = trial;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    let intercept = theta[d];
    theta.truncate(d);
    Ok(LogitModel { weights: theta, intercept })
}
