//! Stable method identifiers and the fitted-model type shared by the CLI,
//! the evaluation harness and the C ABI.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{Family, ForestParams, GbtParams, LearnerSpec, LinearParams, LogitParams};
use crate::matrix::Matrix;
use crate::meta::{fit_mom, fit_two_model, predict_mom, predict_two_model, IteScores, MomModel, MomVariant, TwoModel};
use crate::uplift_forest::{fit_uplift_forest, predict_uplift_forest, UpliftForest, UpliftForestConfig};

pub const METHOD_IDS: [&str; 10] = [
    "2m-logit",
    "2m-rf",
    "2m-gbt",
    "mom-w-linear",
    "mom-w-rf",
    "mom-w-gbt",
    "mom-j-logit",
    "mom-j-rf",
    "mom-j-gbt",
    "uplift-rf",
];

#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    TwoModel(LearnerSpec),
    Mom { variant: MomVariant, learner: LearnerSpec },
    UpliftForest(UpliftForestConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub id: String,
    pub kind: MethodKind,
    /// Upper bound on training rows; the cap keeps the arms balanced.
    pub train_cap: Option<usize>,
}

fn default_family(name: &str) -> Option<Family> {
    Some(match name {
        "logit" => Family::Logit(LogitParams::default()),
        "linear" => Family::Linear(LinearParams::default()),
        "rf" => Family::RandomForest(ForestParams::default()),
        "gbt" => Family::Gbt(GbtParams::default()),
        _ => return None,
    })
}

impl MethodSpec {
    pub fn from_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownMethod { id: id.to_string(), valid: METHOD_IDS.join(", ") };
        if !METHOD_IDS.contains(&id) {
            return Err(unknown());
        }
        let kind = if id == "uplift-rf" {
            MethodKind::UpliftForest(UpliftForestConfig::default())
        } else if let Some(learner) = id.strip_prefix("2m-") {
            MethodKind::TwoModel(LearnerSpec::classifier(default_family(learner).ok_or_else(unknown)?))
        } else if let Some(learner) = id.strip_prefix("mom-w-") {
            let learner = LearnerSpec::regressor(default_family(learner).ok_or_else(unknown)?);
            MethodKind::Mom { variant: MomVariant::Weisberg, learner }
        } else if let Some(learner) = id.strip_prefix("mom-j-") {
            let learner = LearnerSpec::classifier(default_family(learner).ok_or_else(unknown)?);
            MethodKind::Mom { variant: MomVariant::Jaskowski, learner }
        } else {
            return Err(unknown());
        };
        Ok(MethodSpec { id: id.to_string(), kind, train_cap: None })
    }

    pub fn all() -> Vec<MethodSpec> {
        METHOD_IDS.iter().map(|id| MethodSpec::from_id(id).expect("known id")).collect()
    }

    /// Replace the base-learner hyperparameters; the family must match the id.
    pub fn with_learner(mut self, family: Family) -> Result<Self> {
        let spec = match &mut self.kind {
            MethodKind::TwoModel(spec) | MethodKind::Mom { learner: spec, .. } => spec,
            MethodKind::UpliftForest(_) => {
                return Err(Error::config(format!("methods.{}.learner", self.id), "uplift-rf takes `forest`, not `learner`"))
            }
        };
        if spec.family.name() != family.name() {
            return Err(Error::config(
                format!("methods.{}.learner", self.id),
                format!("family `{}` does not match the method's `{}`", family.name(), spec.family.name()),
            ));
        }
        spec.family = family;
        spec.validate()?;
        Ok(self)
    }

    pub fn with_forest(mut self, config: UpliftForestConfig) -> Result<Self> {
        match &mut self.kind {
            MethodKind::UpliftForest(c) => {
                config.validate()?;
                *c = config;
                Ok(self)
            }
            _ => Err(Error::config(format!("methods.{}.forest", self.id), "only uplift-rf takes `forest`")),
        }
    }

    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<IteModel> {
        let model = match &self.kind {
            MethodKind::TwoModel(spec) => IteModelKind::TwoModel(fit_two_model(train, spec, seed)?),
            MethodKind::Mom { variant, learner } => IteModelKind::Mom(fit_mom(train, *variant, learner, seed)?),
            MethodKind::UpliftForest(cfg) => IteModelKind::UpliftForest(fit_uplift_forest(train, cfg, seed)?),
        };
        Ok(IteModel { method_id: self.id.clone(), model })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "approach", rename_all = "snake_case")]
pub enum IteModelKind {
    TwoModel(TwoModel),
    Mom(MomModel),
    UpliftForest(UpliftForest),
}

/// Any fitted estimator that yields a per-row ITE score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteModel {
    pub method_id: String,
    pub model: IteModelKind,
}

impl IteModel {
    pub fn n_features(&self) -> usize {
        match &self.model {
            IteModelKind::TwoModel(m) => m.n_features(),
            IteModelKind::Mom(m) => m.n_features(),
            IteModelKind::UpliftForest(f) => f.n_features,
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<IteScores> {
        let mut s = match &self.model {
            IteModelKind::TwoModel(m) => predict_two_model(m, x)?,
            IteModelKind::Mom(m) => predict_mom(m, x)?,
            IteModelKind::UpliftForest(f) => predict_uplift_forest(f, x)?,
        };
        s.method_id = self.method_id.clone();
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_parses_and_round_trips() {
        for id in METHOD_IDS {
            assert_eq!(MethodSpec::from_id(id).unwrap().id, id);
        }
    }

    #[test]
    fn unknown_id_lists_valid_ids() {
        let err = MethodSpec::from_id("2m-svm").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2m-svm") && msg.contains("mom-j-gbt") && msg.contains("uplift-rf"));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn learner_override_must_match_family() {
        let m = MethodSpec::from_id("2m-rf").unwrap();
        let ok = m.clone().with_learner(Family::RandomForest(ForestParams { n_trees: 5, ..Default::default() }));
        assert!(ok.is_ok());
        assert!(m.with_learner(Family::Gbt(GbtParams::default())).is_err());
        assert!(MethodSpec::from_id("mom-w-linear").unwrap().with_forest(UpliftForestConfig::default()).is_err());
    }
}
