//! Run configuration file (TOML).
//!
//! ```toml
//! seed = 42
//! n_iter = 20            # >= 2
//! fraction = 0.3         # (0, 1], share of the holdout that is targeted
//! train_fraction = 0.5   # (0, 1), per-arm share drawn into the balanced train set
//! ci_level = 0.95        # (0, 1)
//! out = "results"        # output directory
//!
//! [data]                 # either a generator ...
//! source = "synthetic"
//! n_rows = 50000
//! n_features = 12
//! noise_level = 1.0
//! effect = { kind = "sign_flip", magnitude = 0.2 }
//! # effect kinds: constant { effect }, linear_interaction { slope }, sign_flip { magnitude }
//!
//! # [data]               # ... or a CSV file
//! # source = "csv"
//! # path = "criteo.csv"
//! # treatment = "treatment"
//! # outcome = "conversion"
//! # features = ["f0", "f1"]   # default: every column except treatment/outcome/visit/exposure
//!
//! [[methods]]
//! id = "2m-logit"
//! train_cap = 20000      # optional; keeps cap/2 rows per arm
//! learner = { family = "logit", lambda = 1e-4 }
//!
//! [[methods]]
//! id = "uplift-rf"
//! forest = { n_trees = 50, max_depth = 8, min_leaf_t = 20, min_leaf_c = 20 }
//! ```
//!
//! Omitted keys take their defaults; an omitted `methods` list means all ten
//! methods. Command-line flags override the file, which overrides defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, synthesize, Dataset, EffectModel, FeatureColumns, Schema, SyntheticConfig, SyntheticTruth};
use crate::error::{Error, Result};
use crate::evaluation::CvConfig;
use crate::learners::Family;
use crate::method::{MethodSpec, METHOD_IDS};
use crate::rng;
use crate::uplift_forest::UpliftForestConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub n_iter: usize,
    pub fraction: f64,
    pub train_fraction: f64,
    pub ci_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub data: DataSource,
    pub methods: Vec<MethodEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let cv = CvConfig::default();
        RunConfig {
            seed: 0,
            n_iter: cv.n_iter,
            fraction: cv.fraction,
            train_fraction: cv.train_fraction,
            ci_level: cv.ci_level,
            out: None,
            data: DataSource::default(),
            methods: METHOD_IDS.iter().map(|id| MethodEntry::new(id)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticConfig),
    Csv(CsvSource),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticConfig::new(10_000, 12, EffectModel::SignFlip { magnitude: 0.2 }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    #[serde(default = "default_treatment")]
    pub treatment: String,
    #[serde(default = "default_outcome")]
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
}

fn default_treatment() -> String {
    "treatment".into()
}

fn default_outcome() -> String {
    "conversion".into()
}

impl CsvSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        CsvSource { path: path.into(), treatment: default_treatment(), outcome: default_outcome(), features: None }
    }

    pub fn schema(&self) -> Schema {
        Schema {
            features: self.features.clone().map_or(FeatureColumns::Infer, FeatureColumns::Named),
            treatment: self.treatment.clone(),
            outcome: self.outcome.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forest: Option<UpliftForestConfig>,
}

impl MethodEntry {
    pub fn new(id: &str) -> Self {
        MethodEntry { id: id.to_string(), train_cap: None, learner: None, forest: None }
    }

    pub fn to_spec(&self) -> Result<MethodSpec> {
        let mut spec = MethodSpec::from_id(&self.id)?;
        if let Some(f) = &self.learner {
            spec = spec.with_learner(f.clone())?;
        }
        if let Some(f) = &self.forest {
            spec = spec.with_forest(f.clone())?;
        }
        if let Some(cap) = self.train_cap {
            if cap < 4 {
                return Err(Error::config(format!("methods.{}.train_cap", self.id), format!("must be at least 4, got {cap}")));
            }
            spec.train_cap = Some(cap);
        }
        Ok(spec)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn cv(&self) -> CvConfig {
        CvConfig { n_iter: self.n_iter, fraction: self.fraction, train_fraction: self.train_fraction, ci_level: self.ci_level }
    }

    pub fn method_specs(&self) -> Result<Vec<MethodSpec>> {
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        let mut seen = Vec::new();
        for m in &self.methods {
            if seen.contains(&m.id.as_str()) {
                return Err(Error::config("methods", format!("`{}` is listed twice", m.id)));
            }
            seen.push(&m.id);
        }
        self.methods.iter().map(MethodEntry::to_spec).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.cv().validate()?;
        self.method_specs()?;
        if let DataSource::Synthetic(s) = &self.data {
            s.validate()?;
        }
        Ok(())
    }

    pub fn load_data(&self) -> Result<(Dataset, Option<SyntheticTruth>)> {
        load_data(&self.data, self.seed)
    }
}

/// Synthetic data is drawn from a stream derived from the run seed, so
/// `simulate` and `bench` with the same seed see the same rows.
pub fn load_data(source: &DataSource, seed: u64) -> Result<(Dataset, Option<SyntheticTruth>)> {
    match source {
        DataSource::Synthetic(cfg) => {
            let (ds, truth) = synthesize(cfg, data_seed(seed))?;
            Ok((ds, Some(truth)))
        }
        DataSource::Csv(c) => Ok((load_csv(&c.path, &c.schema())?, None)),
    }
}

pub fn data_seed(seed: u64) -> u64 {
    rng::derive_str(seed, "data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LogitParams;

    #[test]
    fn defaults_cover_every_method() {
        let c = RunConfig::default();
        assert_eq!(c.method_specs().unwrap().len(), 10);
        c.validate().unwrap();
    }

    #[test]
    fn documented_example_parses() {
        let text = r#"
seed = 42
n_iter = 20
fraction = 0.3
out = "results"

[data]
source = "synthetic"
n_rows = 50000
n_features = 12
effect = { kind = "sign_flip", magnitude = 0.2 }

[[methods]]
id = "2m-logit"
train_cap = 20000
learner = { family = "logit", lambda = 1e-4 }

[[methods]]
id = "uplift-rf"
forest = { n_trees = 50, max_depth = 8 }
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.train_fraction, 0.5);
        let specs = c.method_specs().unwrap();
        assert_eq!(specs[0].train_cap, Some(20000));
        assert_eq!(c.methods[0].learner, Some(Family::Logit(LogitParams { lambda: 1e-4, ..Default::default() })));
        assert_eq!(c.methods[1].forest.as_ref().unwrap().n_trees, 50);
        match &c.data {
            DataSource::Synthetic(s) => assert_eq!(s.noise_level, 1.0),
            DataSource::Csv(_) => panic!("expected synthetic"),
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::default();
        c.methods[0].train_cap = Some(1000);
        c.methods[0].learner = Some(Family::Logit(LogitParams { lambda: 0.25, ..Default::default() }));
        c.methods[9].forest = Some(UpliftForestConfig { n_trees: 7, ..Default::default() });
        c.fraction = 0.1 + 0.2;
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);

        let mut csv = CsvSource::new("data/criteo.csv");
        csv.features = Some(vec!["f0".into(), "f3".into()]);
        let c = RunConfig { data: DataSource::Csv(csv), out: Some("x".into()), ..Default::default() };
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_toml("n_iters = 3").unwrap_err();
        assert!(e.to_string().contains("n_iters"), "{e}");
        let c = RunConfig { n_iter: 1, ..Default::default() };
        assert!(c.validate().unwrap_err().to_string().contains("n_iter"));
        let c = RunConfig::from_toml("[[methods]]\nid = \"2m-svm\"").unwrap();
        let e = c.validate().unwrap_err();
        assert!(matches!(e, Error::UnknownMethod { .. }));
        assert!(e.to_string().contains("mom-j-gbt"));
        let c = RunConfig::from_toml("[[methods]]\nid = \"2m-logit\"\nlearner = { family = \"gbt\" }").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("methods.2m-logit.learner"));
        let c = RunConfig::from_toml("[[methods]]\nid = \"2m-logit\"\n[[methods]]\nid = \"2m-logit\"").unwrap();
        assert!(c.validate().is_err());
    }
}
