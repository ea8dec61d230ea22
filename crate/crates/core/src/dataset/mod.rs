//! Randomized-experiment data: covariates, a binary treatment flag and a
//! binary response per row.

mod io;
mod split;
mod stats;
mod synthetic;

pub use io::{load_csv, load_features, write_csv, FeatureColumns, Schema};
pub use split::{balanced_split, SplitResult};
pub use stats::{summary_stats, SummaryStats};
pub use synthetic::{synthesize, EffectModel, SyntheticConfig, SyntheticTruth};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    treatment: Vec<bool>,
    outcome: Vec<bool>,
}

impl Dataset {
    pub fn new(features: Matrix, treatment: Vec<bool>, outcome: Vec<bool>) -> Result<Self> {
        let n = features.n_rows();
        if treatment.len() != n || outcome.len() != n {
            return Err(Error::InvalidData(format!(
                "row counts differ: features {n}, treatment {}, outcome {}",
                treatment.len(),
                outcome.len()
            )));
        }
        if features.n_cols() == 0 {
            return Err(Error::InvalidData("dataset needs at least one feature".into()));
        }
        if let Some(pos) = features.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Cell {
                row: pos / features.n_cols() + 1,
                column: format!("feature {}", pos % features.n_cols()),
                reason: "non-finite value".into(),
            });
        }
        Ok(Dataset { features, treatment, outcome })
    }

    /// Build from 0/1 integer vectors, rejecting anything else.
    pub fn from_flags(features: Matrix, treatment: &[u8], outcome: &[u8]) -> Result<Self> {
        let to_bool = |name: &str, v: &[u8]| -> Result<Vec<bool>> {
            v.iter()
                .enumerate()
                .map(|(i, &x)| match x {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(Error::Cell {
                        row: i + 1,
                        column: name.to_string(),
                        reason: format!("expected 0 or 1, got {other}"),
                    }),
                })
                .collect()
        };
        let t = to_bool("treatment", treatment)?;
        let y = to_bool("outcome", outcome)?;
        Dataset::new(features, t, y)
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn treatment(&self) -> &[bool] {
        &self.treatment
    }

    pub fn outcome(&self) -> &[bool] {
        &self.outcome
    }

    pub fn n_treated(&self) -> usize {
        self.treatment.iter().filter(|&&t| t).count()
    }

    pub fn n_control(&self) -> usize {
        self.n_rows() - self.n_treated()
    }

    /// Row indices of the (treated, control) arms in row order.
    pub fn arm_indices(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.n_rows()).partition(|&i| self.treatment[i])
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            treatment: indices.iter().map(|&i| self.treatment[i]).collect(),
            outcome: indices.iter().map(|&i| self.outcome[i]).collect(),
        }
    }

    pub fn outcome_f64(&self) -> Vec<f64> {
        self.outcome.iter().map(|&y| if y { 1.0 } else { 0.0 }).collect()
    }
}
