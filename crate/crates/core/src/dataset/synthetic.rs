//! Synthetic randomized experiments with known per-row effects.
//!
//! Control response probability is `0.2 + 0.4 * sigmoid(noise_level * sum(x) / sqrt(d))`,
//! which stays inside (0.2, 0.6). The treated probability adds the effect
//! model's `tau(x)` on the probability scale, and every effect model keeps
//! `tau` in [-0.2, 0.4], so both probabilities are always valid.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

const CONTROL_FLOOR: f64 = 0.2;
const CONTROL_SPAN: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EffectModel {
    /// tau(x) = effect, with effect in [-0.2, 0.4].
    Constant { effect: f64 },
    /// tau(x) = 0.4 * sigmoid(slope * x0) - 0.2.
    LinearInteraction { slope: f64 },
    /// tau(x) = +magnitude if x0 > 0 else -magnitude, magnitude in [0, 0.2].
    SignFlip { magnitude: f64 },
}

impl EffectModel {
    pub fn effect(&self, x: &[f64]) -> f64 {
        match *self {
            EffectModel::Constant { effect } => effect,
            EffectModel::LinearInteraction { slope } => 0.4 * sigmoid(slope * x[0]) - 0.2,
            EffectModel::SignFlip { magnitude } => {
                if x[0] > 0.0 {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let field = "effect";
        match *self {
            EffectModel::Constant { effect } if !(-0.2..=0.4).contains(&effect) => {
                Err(Error::config(field, format!("constant effect must lie in [-0.2, 0.4], got {effect}")))
            }
            EffectModel::LinearInteraction { slope } if !slope.is_finite() => {
                Err(Error::config(field, "slope must be finite"))
            }
            EffectModel::SignFlip { magnitude } if !(0.0..=0.2).contains(&magnitude) => {
                Err(Error::config(field, format!("sign-flip magnitude must lie in [0, 0.2], got {magnitude}")))
            }
            _ => Ok(()),
        }
    }

    /// Parse the CLI shorthand `constant:0.1`, `linear:1.5`, `sign-flip:0.2`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, value) = s.split_once(':').unwrap_or((s, ""));
        let num = |default: f64| -> Result<f64> {
            if value.is_empty() {
                Ok(default)
            } else {
                value.parse().map_err(|_| Error::config("effect", format!("bad number in `{s}`")))
            }
        };
        let model = match kind {
            "constant" => EffectModel::Constant { effect: num(0.1)? },
            "linear" | "linear-interaction" => EffectModel::LinearInteraction { slope: num(1.0)? },
            "sign-flip" | "sign-flip-subgroup" => EffectModel::SignFlip { magnitude: num(0.2)? },
            _ => {
                return Err(Error::config(
                    "effect",
                    format!("unknown effect model `{kind}` (expected constant, linear or sign-flip)"),
                ))
            }
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_rows: usize,
    pub n_features: usize,
    pub effect: EffectModel,
    #[serde(default = "default_noise")]
    pub noise_level: f64,
}

fn default_noise() -> f64 {
    1.0
}

impl SyntheticConfig {
    pub fn new(n_rows: usize, n_features: usize, effect: EffectModel) -> Self {
        SyntheticConfig { n_rows, n_features, effect, noise_level: default_noise() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows < 10 {
            return Err(Error::config("n_rows", format!("must be at least 10, got {}", self.n_rows)));
        }
        if self.n_features < 1 {
            return Err(Error::config("n_features", "must be at least 1"));
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) {
            return Err(Error::config("noise_level", "must be finite and non-negative"));
        }
        self.effect.validate()
    }

    pub fn control_probability(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().sum::<f64>() / (x.len() as f64).sqrt();
        CONTROL_FLOOR + CONTROL_SPAN * sigmoid(self.noise_level * s)
    }
}

/// Exact per-row response probabilities behind a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTruth {
    pub true_ite: Vec<f64>,
    pub p_treated: Vec<f64>,
    pub p_control: Vec<f64>,
}

impl SyntheticTruth {
    pub fn select(&self, indices: &[usize]) -> SyntheticTruth {
        let pick = |v: &[f64]| indices.iter().map(|&i| v[i]).collect();
        SyntheticTruth {
            true_ite: pick(&self.true_ite),
            p_treated: pick(&self.p_treated),
            p_control: pick(&self.p_control),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub(crate) fn bernoulli<R: Rng>(p: f64, r: &mut R) -> bool {
    r.gen::<f64>() < p
}

pub fn synthesize(config: &SyntheticConfig, seed: u64) -> Result<(Dataset, SyntheticTruth)> {
    config.validate()?;
    let (n, d) = (config.n_rows, config.n_features);
    let mut r = rng::stream(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut treatment = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    let mut truth = SyntheticTruth {
        true_ite: Vec::with_capacity(n),
        p_treated: Vec::with_capacity(n),
        p_control: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let start = data.len();
        data.extend((0..d).map(|_| r.sample::<f64, _>(StandardNormal)));
        let x = &data[start..];
        let p_c = config.control_probability(x);
        let tau = config.effect.effect(x);
        let p_t = (p_c + tau).clamp(0.0, 1.0);
        let t = r.gen_bool(0.5);
        let y = bernoulli(if t { p_t } else { p_c }, &mut r);
        treatment.push(t);
        outcome.push(y);
        truth.true_ite.push(p_t - p_c);
        truth.p_treated.push(p_t);
        truth.p_control.push(p_c);
    }
    let ds = Dataset::new(Matrix::new(n, d, data)?, treatment, outcome)?;
    Ok((ds, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn empirical_ate(ds: &Dataset) -> f64 {
        let (mut st, mut nt, mut sc, mut nc) = (0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in ds.treatment().iter().zip(ds.outcome()) {
            let y = f64::from(u8::from(y));
            if t {
                st += y;
                nt += 1.0;
            } else {
                sc += y;
                nc += 1.0;
            }
        }
        st / nt - sc / nc
    }

    #[test]
    fn zero_effect_has_zero_truth() {
        let cfg = SyntheticConfig::new(5000, 3, EffectModel::Constant { effect: 0.0 });
        let (ds, truth) = synthesize(&cfg, 1).unwrap();
        assert!(truth.true_ite.iter().all(|&v| v == 0.0));
        assert!(empirical_ate(&ds).abs() < 0.04);
    }

    #[test]
    fn constant_effect_monte_carlo() {
        let cfg = SyntheticConfig::new(200_000, 4, EffectModel::Constant { effect: 0.1 });
        let (ds, truth) = synthesize(&cfg, 2024).unwrap();
        // oracle: arm means of the recorded probabilities
        let (mut pt, mut nt, mut pc, mut nc) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..ds.n_rows() {
            if ds.treatment()[i] {
                pt += truth.p_treated[i];
                nt += 1.0;
            } else {
                pc += truth.p_control[i];
                nc += 1.0;
            }
        }
        let expected = pt / nt - pc / nc;
        let ate = empirical_ate(&ds);
        assert!((ate - expected).abs() < 0.005, "ate {ate} vs oracle {expected}");
        assert!((ate - 0.1).abs() < 0.005, "ate {ate}");
    }

    #[test]
    fn sign_flip_truth_is_symmetric() {
        let cfg = SyntheticConfig::new(100_000, 2, EffectModel::SignFlip { magnitude: 0.2 });
        let (ds, truth) = synthesize(&cfg, 99).unwrap();
        let mean = truth.true_ite.iter().sum::<f64>() / truth.true_ite.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        for i in 0..100 {
            let expected = if ds.features().get(i, 0) > 0.0 { 0.2 } else { -0.2 };
            assert!((truth.true_ite[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn truth_invariants_hold() {
        let cfg = SyntheticConfig::new(2000, 3, EffectModel::LinearInteraction { slope: 2.0 });
        let (_, truth) = synthesize(&cfg, 4).unwrap();
        for i in 0..2000 {
            let (pt, pc) = (truth.p_treated[i], truth.p_control[i]);
            assert!((0.0..=1.0).contains(&pt) && (0.0..=1.0).contains(&pc));
            assert_eq!(truth.true_ite[i], pt - pc);
            assert!(truth.true_ite[i].abs() <= 1.0);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = SyntheticConfig::new(100, 2, EffectModel::SignFlip { magnitude: 0.1 });
        assert_eq!(synthesize(&cfg, 3).unwrap(), synthesize(&cfg, 3).unwrap());
    }

    #[test]
    fn outcome_draws_match_recorded_probability() {
        // chi-square goodness of fit for 1e5 repeated draws of one row's outcome
        let cfg = SyntheticConfig::new(10, 2, EffectModel::SignFlip { magnitude: 0.2 });
        let (_, truth) = synthesize(&cfg, 8).unwrap();
        let chi = ChiSquared::new(1.0).unwrap();
        for p in [truth.p_treated[0], truth.p_control[0]] {
            let n = 100_000;
            let mut r = rng::stream(rng::derive(8, 1));
            let ones = (0..n).filter(|_| bernoulli(p, &mut r)).count() as f64;
            let (e1, e0) = (p * n as f64, (1.0 - p) * n as f64);
            let stat = (ones - e1).powi(2) / e1 + ((n as f64 - ones) - e0).powi(2) / e0;
            let p_value = 1.0 - chi.cdf(stat);
            assert!(p_value > 0.001, "chi2 {stat} p {p_value}");
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(synthesize(&SyntheticConfig::new(5, 2, EffectModel::Constant { effect: 0.0 }), 0).is_err());
        assert!(synthesize(&SyntheticConfig::new(50, 0, EffectModel::Constant { effect: 0.0 }), 0).is_err());
        assert!(synthesize(&SyntheticConfig::new(50, 1, EffectModel::Constant { effect: 0.9 }), 0).is_err());
        assert!(EffectModel::parse("sign-flip:0.2").is_ok());
        assert!(EffectModel::parse("svm").is_err());
    }
}
