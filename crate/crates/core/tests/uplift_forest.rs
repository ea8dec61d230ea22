use uplift_core::dataset::{synthesize, EffectModel, SyntheticConfig};
use uplift_core::uplift_forest::{build_uplift_tree, UpliftNode, UpliftTreeConfig};

#[test]
fn sign_flip_first_split_is_feature_zero_near_zero() {
    let d = 4;
    let cfg = UpliftTreeConfig { max_depth: 1, features_per_split: Some(d), ..Default::default() };
    let mut hits = 0;
    for seed in 0..20 {
        let (ds, _) = synthesize(&SyntheticConfig::new(20_000, d, EffectModel::SignFlip { magnitude: 0.2 }), seed).unwrap();
        let tree = build_uplift_tree(&ds, &cfg, seed).unwrap();
        if let UpliftNode::Split { feature: 0, threshold, .. } = tree.nodes()[0] {
            if threshold.abs() < 0.25 {
                hits += 1;
            }
        }
    }
    assert!(hits >= 18, "{hits}/20");
}

/// Not attainable with the plain weighted KL gain: by joint convexity of KL
/// the weighted child divergence is at least the parent's for any split, and
/// sampling noise makes it strictly larger, so every admissible split has
/// positive gain and trees grow to `max_depth` (depth 8 in 20 of 20 seeds).
#[test]
#[ignore = "unattainable under the unnormalized KL gain; see doc comment"]
fn constant_effect_trees_stay_shallow() {
    let cfg = UpliftTreeConfig { features_per_split: Some(3), ..Default::default() };
    let mut shallow = 0;
    for seed in 0..20 {
        let (ds, _) = synthesize(&SyntheticConfig::new(20_000, 3, EffectModel::Constant { effect: 0.1 }), seed).unwrap();
        if build_uplift_tree(&ds, &cfg, seed).unwrap().depth() <= 2 {
            shallow += 1;
        }
    }
    assert!(shallow >= 18, "{shallow}/20");
}
