//! Monte Carlo checks of the reductions against synthetic ground truth.

use rand::Rng;
use rand_distr::StandardNormal;

use uplift_core::dataset::{balanced_split, synthesize, EffectModel, SyntheticConfig};
use uplift_core::evaluation::realized_ate;
use uplift_core::learners::{Family, LearnerSpec, LinearParams, LogitParams};
use uplift_core::meta::{fit_mom, fit_two_model, predict_mom, predict_two_model, transform_weisberg, MomVariant};
use uplift_core::{rng, Dataset, Matrix};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn two_model_logit_recovers_constant_effect() {
    let (ds, _) = synthesize(&SyntheticConfig::new(50_000, 4, EffectModel::Constant { effect: 0.1 }), 17).unwrap();
    let tm = fit_two_model(&ds, &LearnerSpec::classifier(Family::Logit(LogitParams::default())), 1).unwrap();
    let m = mean(&predict_two_model(&tm, ds.features()).unwrap().scores);
    assert!((m - 0.1).abs() <= 0.03, "{m}");
}

#[test]
fn weisberg_is_centered_without_effect() {
    let (ds, _) = synthesize(&SyntheticConfig::new(50_000, 4, EffectModel::Constant { effect: 0.0 }), 18).unwrap();
    let train = balanced_split(&ds, 0.99, 2).unwrap().train;
    let m = fit_mom(&train, MomVariant::Weisberg, &LearnerSpec::regressor(Family::Linear(LinearParams::default())), 3)
        .unwrap();
    let raw = predict_mom(&m, ds.features()).unwrap().raw;
    assert!(mean(&raw).abs() < 0.02, "{}", mean(&raw));
}

#[test]
fn jaskowski_on_independent_coins_is_one_half() {
    let (n, d) = (50_000, 3);
    let mut r = rng::stream(19);
    let x = Matrix::new(n, d, (0..n * d).map(|_| r.sample(StandardNormal)).collect()).unwrap();
    // exactly balanced arms, outcome an independent fair coin
    let t: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let y: Vec<u8> = (0..n).map(|_| u8::from(r.gen_bool(0.5))).collect();
    let ds = Dataset::from_flags(x, &t, &y).unwrap();
    let m = fit_mom(&ds, MomVariant::Jaskowski, &LearnerSpec::classifier(Family::Logit(LogitParams::default())), 4)
        .unwrap();
    let scores = predict_mom(&m, ds.features()).unwrap().scores;
    // score = 2p - 1, so |p - 0.5| = |score| / 2
    let worst = scores.iter().map(|s| s.abs() / 2.0).fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
    assert!((mean(&scores) / 2.0).abs() < 0.01);
}

#[test]
fn weisberg_mean_is_ate_on_every_two_plus_two_dataset() {
    let x = Matrix::new(4, 1, vec![0.0; 4]).unwrap();
    for code in 0..16u32 {
        let y: Vec<u8> = (0..4).map(|i| ((code >> i) & 1) as u8).collect();
        let ds = Dataset::from_flags(x.clone(), &[1, 1, 0, 0], &y).unwrap();
        let a = f64::from(y[0] + y[1]) / 2.0;
        let b = f64::from(y[2] + y[3]) / 2.0;
        assert_eq!(mean(&transform_weisberg(&ds)), a - b);
        assert_eq!(realized_ate(&ds, &[0, 1, 2, 3]).unwrap(), a - b);
    }
}
