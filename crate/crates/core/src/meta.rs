//! Reductions of ITE estimation to ordinary supervised learning.
//!
//! * Two-model (difference score): one classifier per arm, ITE is the
//!   difference of their predicted response probabilities.
//! * Modified outcome, Jaskowski variant: `Z = 1[T == Y]` and a classifier on
//!   `Z`. With equal arms `E[Z|x] = (1 + tau(x)) / 2`, so `tau = 2 P(Z=1|x) - 1`.
//! * Modified outcome, Weisberg variant: `Z = 2Y(2T - 1)` and a regressor on
//!   `Z`. With equal arms `E[Z|x] = tau(x)`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{fit_classifier, fit_regressor, ClassifierModel, LearnerSpec, RegressorModel, Task};
use crate::matrix::Matrix;
use crate::rng;

/// Per-row ITE estimates. `scores` are the reported values; `raw` is what
/// ranking uses and differs from `scores` only when reporting clamps.
#[derive(Debug, Clone, PartialEq)]
pub struct IteScores {
    pub method_id: String,
    pub scores: Vec<f64>,
    pub raw: Vec<f64>,
}

impl IteScores {
    pub fn new(method_id: impl Into<String>, scores: Vec<f64>) -> Self {
        IteScores { method_id: method_id.into(), raw: scores.clone(), scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn ranking(&self) -> &[f64] {
        &self.raw
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModel {
    pub model_treated: ClassifierModel,
    pub model_control: ClassifierModel,
}

impl TwoModel {
    pub fn new(model_treated: ClassifierModel, model_control: ClassifierModel) -> Result<Self> {
        if model_treated.n_features != model_control.n_features {
            return Err(Error::DimensionMismatch {
                expected: model_treated.n_features,
                actual: model_control.n_features,
            });
        }
        Ok(TwoModel { model_treated, model_control })
    }

    pub fn n_features(&self) -> usize {
        self.model_treated.n_features
    }
}

fn require_arms(ds: &Dataset, needed: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (t, c) = ds.arm_indices();
    if t.len() < needed || c.len() < needed {
        return Err(Error::TooFewRows { needed, treated: t.len(), control: c.len() });
    }
    Ok((t, c))
}

/// Arm models are seeded with `derive_str(seed, "treated" | "control")` and fit concurrently.
pub fn fit_two_model(train: &Dataset, spec: &LearnerSpec, seed: u64) -> Result<TwoModel> {
    if spec.task != Task::Classification {
        return Err(Error::config("task", "the two-model approach needs a classification learner"));
    }
    let (t_idx, c_idx) = require_arms(train, 2)?;
    let fit_arm = |idx: &[usize], label: &str| {
        let arm = train.subset(idx);
        fit_classifier(arm.features(), arm.outcome(), spec, rng::derive_str(seed, label))
    };
    let (treated, control) = rayon::join(|| fit_arm(&t_idx, "treated"), || fit_arm(&c_idx, "control"));
    TwoModel::new(treated?, control?)
}

pub fn predict_two_model(tm: &TwoModel, x: &Matrix) -> Result<IteScores> {
    let pt = tm.model_treated.predict_proba(x)?;
    let pc = tm.model_control.predict_proba(x)?;
    Ok(IteScores::new("2m", pt.iter().zip(&pc).map(|(a, b)| a - b).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomVariant {
    Jaskowski,
    Weisberg,
}

impl MomVariant {
    pub fn task(self) -> Task {
        match self {
            MomVariant::Jaskowski => Task::Classification,
            MomVariant::Weisberg => Task::Regression,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomInner {
    Classifier(ClassifierModel),
    Regressor(RegressorModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomModel {
    pub variant: MomVariant,
    pub inner: MomInner,
}

impl MomModel {
    pub fn new(variant: MomVariant, inner: MomInner) -> Result<Self> {
        match (variant, &inner) {
            (MomVariant::Jaskowski, MomInner::Classifier(_)) | (MomVariant::Weisberg, MomInner::Regressor(_)) => {
                Ok(MomModel { variant, inner })
            }
            _ => Err(Error::config("variant", "jaskowski needs a classifier, weisberg a regressor")),
        }
    }

    pub fn n_features(&self) -> usize {
        match &self.inner {
            MomInner::Classifier(m) => m.n_features,
            MomInner::Regressor(m) => m.n_features,
        }
    }
}

/// `Z = 1` iff `T == Y`.
pub fn transform_jaskowski(ds: &Dataset) -> Vec<bool> {
    ds.treatment().iter().zip(ds.outcome()).map(|(t, y)| t == y).collect()
}

/// `Z = 2Y(2T - 1)`: 2 for a treated responder, -2 for a control responder, else 0.
pub fn transform_weisberg(ds: &Dataset) -> Vec<f64> {
    ds.treatment()
        .iter()
        .zip(ds.outcome())
        .map(|(&t, &y)| match (t, y) {
            (true, true) => 2.0,
            (false, true) => -2.0,
            (_, false) => 0.0,
        })
        .collect()
}

pub fn fit_mom(train: &Dataset, variant: MomVariant, spec: &LearnerSpec, seed: u64) -> Result<MomModel> {
    if spec.task != variant.task() {
        return Err(Error::config("task", format!("the {variant:?} variant needs a {:?} learner", variant.task())));
    }
    if train.n_rows() == 0 {
        return Err(Error::InvalidData("empty training set".into()));
    }
    let (nt, nc) = (train.n_treated(), train.n_control());
    if nt != nc {
        return Err(Error::Unbalanced { treated: nt, control: nc });
    }
    let inner = match variant {
        MomVariant::Jaskowski => {
            MomInner::Classifier(fit_classifier(train.features(), &transform_jaskowski(train), spec, seed)?)
        }
        MomVariant::Weisberg => {
            MomInner::Regressor(fit_regressor(train.features(), &transform_weisberg(train), spec, seed)?)
        }
    };
    MomModel::new(variant, inner)
}

/// Jaskowski: `2p - 1`. Weisberg: the regressor output, clamped to [-1, 1]
/// in `scores` with the unclamped value kept in `raw` for ranking.
pub fn predict_mom(m: &MomModel, x: &Matrix) -> Result<IteScores> {
    match &m.inner {
        MomInner::Classifier(c) => {
            let s = c.predict_proba(x)?.into_iter().map(|p| 2.0 * p - 1.0).collect();
            Ok(IteScores::new("mom-j", s))
        }
        MomInner::Regressor(r) => {
            let raw = r.predict_value(x)?;
            let scores = raw.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
            Ok(IteScores { method_id: "mom-w".into(), scores, raw })
        }
    }
}
