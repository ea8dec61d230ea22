//! Versioned JSON model files.
//!
//! ```json
//! { "format": "uplift-model", "version": 1, "model": { "type": "ite", ... } }
//! ```
//!
//! Readers accept any file whose major `version` they know. Floats are
//! written in shortest round-trip form, so save/load is bit exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{ClassifierKind, ClassifierModel, RegressorKind, RegressorModel, Tree};
use crate::meta::{MomInner, MomModel};
use crate::method::{IteModel, IteModelKind};

pub const FORMAT: &str = "uplift-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SavedModel {
    Classifier(ClassifierModel),
    Regressor(RegressorModel),
    Ite(IteModel),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: SavedModel,
}

fn check_trees<'a>(trees: impl IntoIterator<Item = &'a Tree>, n_features: usize) -> Result<()> {
    for t in trees {
        if t.max_feature().is_some_and(|f| f >= n_features) {
            return Err(Error::ModelFormat(format!("tree splits on a feature beyond {n_features}")));
        }
    }
    Ok(())
}

fn check_classifier(m: &ClassifierModel) -> Result<()> {
    match &m.kind {
        ClassifierKind::Constant { rate } if !(0.0..=1.0).contains(rate) => {
            Err(Error::ModelFormat(format!("constant rate {rate} outside [0, 1]")))
        }
        ClassifierKind::Constant { .. } => Ok(()),
        ClassifierKind::Logit(l) if l.weights.len() != m.n_features => {
            Err(Error::ModelFormat("logit weight count differs from n_features".into()))
        }
        ClassifierKind::Logit(_) => Ok(()),
        ClassifierKind::Forest(f) => check_trees(f.trees(), m.n_features),
        ClassifierKind::Gbt(g) => check_trees(&g.trees, m.n_features),
    }
}

fn check_regressor(m: &RegressorModel) -> Result<()> {
    match &m.kind {
        RegressorKind::Linear(l) if l.weights.len() != m.n_features => {
            Err(Error::ModelFormat("linear weight count differs from n_features".into()))
        }
        RegressorKind::Linear(_) => Ok(()),
        RegressorKind::Forest(f) => check_trees(f.trees(), m.n_features),
        RegressorKind::Gbt(g) => check_trees(&g.trees, m.n_features),
    }
}

impl SavedModel {
    fn validate(&self) -> Result<()> {
        match self {
            SavedModel::Classifier(m) => check_classifier(m),
            SavedModel::Regressor(m) => check_regressor(m),
            SavedModel::Ite(m) => match &m.model {
                IteModelKind::TwoModel(tm) => {
                    check_classifier(&tm.model_treated)?;
                    check_classifier(&tm.model_control)?;
                    if tm.model_treated.n_features != tm.model_control.n_features {
                        return Err(Error::ModelFormat("arm models disagree on n_features".into()));
                    }
                    Ok(())
                }
                IteModelKind::Mom(MomModel { inner, variant }) => {
                    MomModel::new(*variant, inner.clone()).map_err(|e| Error::ModelFormat(e.to_string()))?;
                    match inner {
                        MomInner::Classifier(c) => check_classifier(c),
                        MomInner::Regressor(r) => check_regressor(r),
                    }
                }
                IteModelKind::UpliftForest(f) => {
                    crate::uplift_forest::UpliftForest::from_trees(f.trees().to_vec(), f.n_features, f.config.clone())
                        .map(|_| ())
                        .map_err(|e| Error::ModelFormat(e.to_string()))
                }
            },
        }
    }
}

pub fn to_json(model: &SavedModel) -> Result<String> {
    let env = Envelope { format: FORMAT.into(), version: FORMAT_VERSION, model: model.clone() };
    serde_json::to_string(&env).map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn from_json(text: &str) -> Result<SavedModel> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if env.format != FORMAT {
        return Err(Error::ModelFormat(format!("expected format `{FORMAT}`, got `{}`", env.format)));
    }
    if env.version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {} (reader knows {FORMAT_VERSION})", env.version)));
    }
    env.model.validate()?;
    Ok(env.model)
}

pub fn save(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub fn load_ite(path: impl AsRef<Path>) -> Result<IteModel> {
    match load(path)? {
        SavedModel::Ite(m) => Ok(m),
        _ => Err(Error::ModelFormat("file holds a base learner, not an ITE model".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, EffectModel, SyntheticConfig};
    use crate::learners::{Forest, ForestParams};
    use crate::method::{MethodSpec, METHOD_IDS};
    use crate::uplift_forest::UpliftForestConfig;
    use crate::learners::{Family, GbtParams};

    #[test]
    fn every_method_round_trips_bit_exactly() {
        let (ds, _) = synthesize(&SyntheticConfig::new(600, 2, EffectModel::SignFlip { magnitude: 0.2 }), 1).unwrap();
        let train = crate::dataset::balanced_split(&ds, 0.5, 2).unwrap().train;
        for id in METHOD_IDS {
            let mut spec = MethodSpec::from_id(id).unwrap();
            spec = match id {
                "uplift-rf" => spec.with_forest(UpliftForestConfig { n_trees: 3, ..Default::default() }).unwrap(),
                _ if id.ends_with("-rf") => spec.with_learner(Family::RandomForest(ForestParams { n_trees: 3, ..Default::default() })).unwrap(),
                _ if id.ends_with("-gbt") => spec.with_learner(Family::Gbt(GbtParams { n_rounds: 3, ..Default::default() })).unwrap(),
                _ => spec,
            };
            let model = SavedModel::Ite(spec.fit(&train, 4).unwrap());
            let back = from_json(&to_json(&model).unwrap()).unwrap();
            assert_eq!(back, model, "{id}");
        }
    }

    #[test]
    fn rejects_wrong_format_version_and_bad_trees() {
        let m = SavedModel::Classifier(ClassifierModel::constant(0.3, 2));
        let text = to_json(&m).unwrap();
        assert!(from_json(&text.replace("\"version\":1", "\"version\":2")).is_err());
        assert!(from_json(&text.replace("uplift-model", "other")).is_err());

        let tree = Tree::from_nodes(vec![
            crate::learners::Node::Split { feature: 5, threshold: 0.0, left: 1, right: 2 },
            crate::learners::Node::Leaf { value: 0.0 },
            crate::learners::Node::Leaf { value: 1.0 },
        ])
        .unwrap();
        let bad = SavedModel::Classifier(ClassifierModel {
            n_features: 2,
            kind: ClassifierKind::Forest(Forest::from_trees(vec![tree]).unwrap()),
        });
        assert!(from_json(&to_json(&bad).unwrap()).is_err());
    }
}
