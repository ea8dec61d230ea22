//! Ridge least squares with an unpenalized intercept, solved on centered data
//! through a Cholesky factorization of the d x d normal equations.

use serde::{Deserialize, Serialize};

use super::tree::stable_mean;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearParams {
    pub lambda: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams { lambda: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

fn cholesky_solve(a: &[f64], b: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let v = a[i * d + i] - s;
                if !(v > 0.0) {
                    return None;
                }
                l[i * d + i] = v.sqrt();
            } else {
                l[i * d + j] = (a[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    let mut z = vec![0.0; d];
    for i in 0..d {
        let s: f64 = (0..i).map(|k| l[i * d + k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i * d + i];
    }
    let mut w = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|k| l[k * d + i] * w[k]).sum();
        w[i] = (z[i] - s) / l[i * d + i];
    }
    Some(w)
}

/// Minimizes `1/(2n) |z - Xw - b|^2 + lambda/2 |w|^2`. A singular system is
/// retried with a growing diagonal jitter, so fitting never fails on rank.
pub fn fit(x: &Matrix, z: &[f64], params: &LinearParams) -> Result<LinearModel> {
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(Error::config("lambda", "must be finite and non-negative"));
    }
    let (n, d) = (x.n_rows(), x.n_cols());
    let nf = n as f64;
    let x_mean: Vec<f64> = (0..d).map(|j| stable_mean((0..n).map(|i| x.get(i, j)))).collect();
    let z_mean = stable_mean(z.iter().copied());

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut centered = vec![0.0; d];
    for i in 0..n {
        for (j, c) in centered.iter_mut().enumerate() {
            *c = x.get(i, j) - x_mean[j];
        }
        let zc = z[i] - z_mean;
        for j in 0..d {
            rhs[j] += centered[j] * zc;
            for k in 0..=j {
                gram[j * d + k] += centered[j] * centered[k];
            }
        }
    }
    for j in 0..d {
        rhs[j] /= nf;
        for k in 0..=j {
            gram[j * d + k] /= nf;
            gram[k * d + j] = gram[j * d + k];
        }
    }
    let scale = (0..d).map(|j| gram[j * d + j]).fold(0.0, f64::max).max(1.0);
    let mut jitter = 0.0;
    let weights = loop {
        let mut a = gram.clone();
        for j in 0..d {
            a[j * d + j] += params.lambda + jitter;
        }
        if let Some(w) = cholesky_solve(&a, &rhs, d) {
            break w;
        }
        jitter = if jitter == 0.0 { 1e-12 * scale } else { jitter * 10.0 };
        if jitter > scale {
            return Err(Error::Numeric("ridge system could not be regularized".into()));
        }
    };
    let intercept = z_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel { weights, intercept })
}
