//! Base learners used inside the meta-learners.

pub mod forest;
pub mod gbt;
pub mod linear;
pub mod logit;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use forest::{Forest, ForestParams};
pub use gbt::{Gbt, GbtParams, Loss};
pub use linear::{LinearModel, LinearParams};
pub use logit::{LogisticObjective, LogitModel, LogitParams};
pub use tree::{Node, Tree};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Logit(LogitParams),
    Linear(LinearParams),
    RandomForest(ForestParams),
    Gbt(GbtParams),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Logit(_) => "logit",
            Family::Linear(_) => "linear",
            Family::RandomForest(_) => "random_forest",
            Family::Gbt(_) => "gbt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub task: Task,
    #[serde(flatten)]
    pub family: Family,
}

impl LearnerSpec {
    pub fn classifier(family: Family) -> Self {
        LearnerSpec { task: Task::Classification, family }
    }

    pub fn regressor(family: Family) -> Self {
        LearnerSpec { task: Task::Regression, family }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.family, self.task) {
            (Family::Logit(_), Task::Regression) => {
                Err(Error::config("family", "logit is a classification-only family"))
            }
            (Family::Linear(_), Task::Classification) => {
                Err(Error::config("family", "linear is a regression-only family"))
            }
            (Family::Logit(p), _) => p.validate(),
            (Family::Linear(p), _) => {
                if p.lambda >= 0.0 && p.lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::config("lambda", "must be finite and non-negative"))
                }
            }
            (Family::RandomForest(p), _) => {
                p.validate()?;
                Ok(())
            }
            (Family::Gbt(p), _) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    Constant { rate: f64 },
    Logit(LogitModel),
    Forest(Forest),
    Gbt(Gbt),
}

/// Fitted probabilistic classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub n_features: usize,
    pub kind: ClassifierKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressorKind {
    Linear(LinearModel),
    Forest(Forest),
    Gbt(Gbt),
}

/// Fitted real-valued regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorModel {
    pub n_features: usize,
    pub kind: RegressorKind,
}

fn check_rows(x: &Matrix, n: usize) -> Result<()> {
    if x.n_rows() != n {
        return Err(Error::InvalidData(format!("{} feature rows but {n} targets", x.n_rows())));
    }
    if x.n_rows() < 2 {
        return Err(Error::InvalidData("need at least 2 training rows".into()));
    }
    Ok(())
}

/// Single-class input yields a constant model with Laplace-smoothed rate
/// `(n1 + 1) / (n + 2)` for every family.
pub fn fit_classifier(x: &Matrix, y: &[bool], spec: &LearnerSpec, seed: u64) -> Result<ClassifierModel> {
    spec.validate()?;
    if spec.task != Task::Classification {
        return Err(Error::config("task", "fit_classifier needs a classification spec"));
    }
    check_rows(x, y.len())?;
    let n_features = x.n_cols();
    let ones = y.iter().filter(|&&v| v).count();
    if ones == 0 || ones == y.len() {
        let rate = (ones as f64 + 1.0) / (y.len() as f64 + 2.0);
        return Ok(ClassifierModel { n_features, kind: ClassifierKind::Constant { rate } });
    }
    let target: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
    let kind = match &spec.family {
        Family::Logit(p) => ClassifierKind::Logit(logit::fit(x, &target, p)?),
        Family::RandomForest(p) => ClassifierKind::Forest(Forest::fit(x, &target, p, seed)?),
        Family::Gbt(p) => ClassifierKind::Gbt(Gbt::fit(x, &target, Loss::Logistic, p, seed)?),
        Family::Linear(_) => unreachable!("rejected by validate"),
    };
    Ok(ClassifierModel { n_features, kind })
}

pub fn fit_regressor(x: &Matrix, z: &[f64], spec: &LearnerSpec, seed: u64) -> Result<RegressorModel> {
    spec.validate()?;
    if spec.task != Task::Regression {
        return Err(Error::config("task", "fit_regressor needs a regression spec"));
    }
    check_rows(x, z.len())?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("regression target has non-finite values".into()));
    }
    let kind = match &spec.family {
        Family::Linear(p) => RegressorKind::Linear(linear::fit(x, z, p)?),
        Family::RandomForest(p) => RegressorKind::Forest(Forest::fit(x, z, p, seed)?),
        Family::Gbt(p) => RegressorKind::Gbt(Gbt::fit(x, z, Loss::Squared, p, seed)?),
        Family::Logit(_) => unreachable!("rejected by validate"),
    };
    Ok(RegressorModel { n_features: x.n_cols(), kind })
}

impl ClassifierModel {
    pub fn constant(rate: f64, n_features: usize) -> Self {
        ClassifierModel { n_features, kind: ClassifierKind::Constant { rate: rate.clamp(0.0, 1.0) } }
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let p = match &self.kind {
            ClassifierKind::Constant { rate } => *rate,
            ClassifierKind::Logit(m) => m.predict_row(x),
            ClassifierKind::Forest(f) => f.predict_row(x),
            ClassifierKind::Gbt(g) => g.predict_row(x),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }
}

impl RegressorModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match &self.kind {
            RegressorKind::Linear(m) => m.predict_row(x),
            RegressorKind::Forest(f) => f.predict_row(x),
            RegressorKind::Gbt(g) => g.predict_row(x),
        }
    }

    pub fn predict_value(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        Ok(x.rows().map(|r| self.predict_row(r)).collect())
    }
}

/// Shorthand for the predict operation on a fitted classifier.
pub fn predict_proba(model: &ClassifierModel, x: &Matrix) -> Result<Vec<f64>> {
    model.predict_proba(x)
}

pub fn predict_value(model: &RegressorModel, x: &Matrix) -> Result<Vec<f64>> {
    model.predict_value(x)
}
