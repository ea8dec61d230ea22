//! Uplift random forest.
//!
//! Trees split greedily to maximize the gain in Kullback-Leibler divergence
//! between the treated and control response distributions:
//!
//! ```text
//! gain = sum_child (n_child / n_parent) * KL(p_t,child || p_c,child) - KL(p_t,parent || p_c,parent)
//! ```
//!
//! Every rate is Laplace smoothed, `(c + 1) / (n + 2)`, so KL stays finite.
//! A leaf predicts its smoothed `p_t - p_c`; the forest averages its trees.
//! Bootstrap samples are drawn within each arm so every tree sees both arms.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::forest::sqrt_features;
use crate::matrix::Matrix;
use crate::meta::IteScores;
use crate::rng;

const ALPHA: f64 = 1.0;

/// Treated/control row and response counts of a node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCounts {
    pub n_t: u64,
    pub c_t: u64,
    pub n_c: u64,
    pub c_c: u64,
}

impl NodeCounts {
    pub fn new(n_t: u64, c_t: u64, n_c: u64, c_c: u64) -> Result<Self> {
        if c_t > n_t || c_c > n_c {
            return Err(Error::InvalidData(format!("invalid node counts ({n_t}, {c_t}, {n_c}, {c_c})")));
        }
        Ok(NodeCounts { n_t, c_t, n_c, c_c })
    }

    pub fn total(&self) -> u64 {
        self.n_t + self.n_c
    }

    pub fn treated_rate(&self) -> f64 {
        (self.c_t as f64 + ALPHA) / (self.n_t as f64 + 2.0 * ALPHA)
    }

    pub fn control_rate(&self) -> f64 {
        (self.c_c as f64 + ALPHA) / (self.n_c as f64 + 2.0 * ALPHA)
    }

    pub fn uplift(&self) -> f64 {
        self.treated_rate() - self.control_rate()
    }

    fn divergence(&self) -> f64 {
        bernoulli_kl(self.treated_rate(), self.control_rate())
    }

    fn add(&mut self, treated: bool, outcome: bool) {
        if treated {
            self.n_t += 1;
            self.c_t += u64::from(outcome);
        } else {
            self.n_c += 1;
            self.c_c += u64::from(outcome);
        }
    }

    fn minus(&self, other: &NodeCounts) -> NodeCounts {
        NodeCounts {
            n_t: self.n_t - other.n_t,
            c_t: self.c_t - other.c_t,
            n_c: self.n_c - other.n_c,
            c_c: self.c_c - other.c_c,
        }
    }
}

impl std::ops::Add for NodeCounts {
    type Output = NodeCounts;

    fn add(self, o: NodeCounts) -> NodeCounts {
        NodeCounts { n_t: self.n_t + o.n_t, c_t: self.c_t + o.c_t, n_c: self.n_c + o.n_c, c_c: self.c_c + o.c_c }
    }
}

fn xlogy(x: f64, ratio: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ratio.ln()
    }
}

fn bernoulli_kl(p: f64, q: f64) -> f64 {
    xlogy(p, p / q) + xlogy(1.0 - p, (1.0 - p) / (1.0 - q))
}

/// KL(Bernoulli(p) || Bernoulli(q)) with `0 log 0 = 0`. Inputs are expected
/// to be smoothed already; a degenerate `q` with `p != q` is an error.
pub fn kl_divergence(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::Numeric(format!("KL arguments must lie in [0, 1], got p={p}, q={q}")));
    }
    if p == q {
        return Ok(0.0);
    }
    if q == 0.0 || q == 1.0 {
        return Err(Error::Numeric(format!("KL({p} || {q}) is infinite; rates must be smoothed")));
    }
    Ok(bernoulli_kl(p, q).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinLeaf {
    pub treated: u64,
    pub control: u64,
}

impl MinLeaf {
    pub fn admits(&self, child: &NodeCounts) -> bool {
        child.n_t >= self.treated && child.n_c >= self.control
    }
}

/// A candidate split with a child below the minimum arm size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inadmissible;

impl fmt::Display for Inadmissible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("child below the minimum arm size")
    }
}

fn raw_gain(parent: &NodeCounts, left: &NodeCounts, right: &NodeCounts, parent_kl: f64) -> f64 {
    let n = parent.total() as f64;
    left.total() as f64 / n * left.divergence() + right.total() as f64 / n * right.divergence() - parent_kl
}

/// Weighted child divergence minus parent divergence. May be negative.
pub fn split_gain(
    parent: &NodeCounts,
    left: &NodeCounts,
    right: &NodeCounts,
    min_leaf: MinLeaf,
) -> std::result::Result<f64, Inadmissible> {
    debug_assert_eq!(*left + *right, *parent);
    if !min_leaf.admits(left) || !min_leaf.admits(right) {
        return Err(Inadmissible);
    }
    Ok(raw_gain(parent, left, right, parent.divergence()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpliftTreeConfig {
    pub max_depth: usize,
    pub min_leaf_t: u64,
    pub min_leaf_c: u64,
    /// `None` means ceil(sqrt(d)).
    pub features_per_split: Option<usize>,
}

impl Default for UpliftTreeConfig {
    fn default() -> Self {
        UpliftTreeConfig { max_depth: 8, min_leaf_t: 20, min_leaf_c: 20, features_per_split: None }
    }
}

impl UpliftTreeConfig {
    fn min_leaf(&self) -> MinLeaf {
        MinLeaf { treated: self.min_leaf_t, control: self.min_leaf_c }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features_per_split == Some(0) {
            return Err(Error::config("features_per_split", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpliftNode {
    Leaf { counts: NodeCounts },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize, counts: NodeCounts },
}

impl UpliftNode {
    pub fn counts(&self) -> NodeCounts {
        match self {
            UpliftNode::Leaf { counts } | UpliftNode::Split { counts, .. } => *counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpliftTree {
    nodes: Vec<UpliftNode>,
}

impl UpliftTree {
    pub fn from_nodes(nodes: Vec<UpliftNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidData("uplift tree needs at least one node".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let UpliftNode::Split { left, right, .. } = *n {
                if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return Err(Error::InvalidData(format!("node {i} has invalid children")));
                }
            }
        }
        Ok(UpliftTree { nodes })
    }

    pub fn nodes(&self) -> &[UpliftNode] {
        &self.nodes
    }

    pub fn root_counts(&self) -> NodeCounts {
        self.nodes[0].counts()
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeCounts> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            UpliftNode::Leaf { counts } => Some(*counts),
            UpliftNode::Split { .. } => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[UpliftNode], i: usize) -> usize {
            match nodes[i] {
                UpliftNode::Leaf { .. } => 0,
                UpliftNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Smoothed `p_t - p_c` of the leaf `x` falls into.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                UpliftNode::Leaf { counts } => return counts.uplift(),
                UpliftNode::Split { feature, threshold, left, right, .. } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub(crate) fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                UpliftNode::Split { feature, .. } => Some(*feature),
                UpliftNode::Leaf { .. } => None,
            })
            .max()
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    treatment: &'a [bool],
    outcome: &'a [bool],
    config: &'a UpliftTreeConfig,
    features_per_split: usize,
    nodes: Vec<UpliftNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> NodeCounts {
        let mut c = NodeCounts::default();
        for &r in rows {
            c.add(self.treatment[r], self.outcome[r]);
        }
        c
    }

    fn best_split<R: Rng>(&self, rows: &[usize], parent: &NodeCounts, rng: &mut R) -> Option<BestSplit> {
        let d = self.x.n_cols();
        let mut features = sample(rng, d, self.features_per_split.clamp(1, d)).into_vec();
        features.sort_unstable();
        let min_leaf = self.config.min_leaf();
        let parent_kl = parent.divergence();

        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for &f in &features {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.x.get(r, f), r)));
            sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut left = NodeCounts::default();
            for i in 0..sorted.len() - 1 {
                let r = sorted[i].1;
                left.add(self.treatment[r], self.outcome[r]);
                let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
                if lo == hi {
                    continue;
                }
                let right = parent.minus(&left);
                if !min_leaf.admits(&left) {
                    continue;
                }
                // right only shrinks from here on
                if !min_leaf.admits(&right) {
                    break;
                }
                let gain = raw_gain(parent, &left, &right, parent_kl);
                if best.as_ref().map_or(true, |b| gain > b.gain) {
                    best = Some(BestSplit { feature: f, threshold: lo + (hi - lo) / 2.0, gain });
                }
            }
        }
        best
    }

    fn grow<R: Rng>(&mut self, rows: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&rows);
        self.nodes.push(UpliftNode::Leaf { counts });
        if depth >= self.config.max_depth {
            return id;
        }
        let split = match self.best_split(&rows, &counts, rng) {
            Some(s) if s.gain > 0.0 => s,
            _ => return id,
        };
        let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.x.get(r, split.feature) <= split.threshold);
        let left = self.grow(l_rows, depth + 1, rng);
        let right = self.grow(r_rows, depth + 1, rng);
        self.nodes[id] = UpliftNode::Split { feature: split.feature, threshold: split.threshold, left, right, counts };
        id
    }
}

fn check_both_arms(ds: &Dataset) -> Result<()> {
    if ds.n_treated() == 0 || ds.n_control() == 0 {
        return Err(Error::TooFewRows { needed: 1, treated: ds.n_treated(), control: ds.n_control() });
    }
    Ok(())
}

fn build_on_rows<R: Rng>(train: &Dataset, rows: Vec<usize>, config: &UpliftTreeConfig, rng: &mut R) -> UpliftTree {
    let mut b = Builder {
        x: train.features(),
        treatment: train.treatment(),
        outcome: train.outcome(),
        config,
        features_per_split: config.features_per_split.unwrap_or_else(|| sqrt_features(train.n_features())),
        nodes: Vec::new(),
    };
    b.grow(rows, 0, rng);
    UpliftTree { nodes: b.nodes }
}

pub fn build_uplift_tree(train: &Dataset, config: &UpliftTreeConfig, seed: u64) -> Result<UpliftTree> {
    config.validate()?;
    check_both_arms(train)?;
    let mut r = rng::stream(seed);
    Ok(build_on_rows(train, (0..train.n_rows()).collect(), config, &mut r))
}

pub fn predict_uplift_tree(tree: &UpliftTree, x: &[f64], n_features: usize) -> Result<f64> {
    if x.len() != n_features {
        return Err(Error::DimensionMismatch { expected: n_features, actual: x.len() });
    }
    Ok(tree.predict_row(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpliftForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    #[serde(flatten)]
    pub tree: UpliftTreeConfig,
}

impl Default for UpliftForestConfig {
    fn default() -> Self {
        UpliftForestConfig { n_trees: 100, bootstrap: true, tree: UpliftTreeConfig::default() }
    }
}

impl UpliftForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::config("n_trees", "must be at least 1"));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpliftForest {
    pub n_features: usize,
    pub config: UpliftForestConfig,
    trees: Vec<UpliftTree>,
}

impl UpliftForest {
    pub fn from_trees(trees: Vec<UpliftTree>, n_features: usize, config: UpliftForestConfig) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidData("forest needs at least one tree".into()));
        }
        if let Some(f) = trees.iter().filter_map(UpliftTree::max_feature).max() {
            if f >= n_features {
                return Err(Error::DimensionMismatch { expected: n_features, actual: f + 1 });
            }
        }
        Ok(UpliftForest { n_features, config, trees })
    }

    pub fn trees(&self) -> &[UpliftTree] {
        &self.trees
    }

    /// Mean over trees, summed in sorted order so tree order cannot change the result.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut v: Vec<f64> = self.trees.iter().map(|t| t.predict_row(x)).collect();
        v.sort_unstable_by(f64::total_cmp);
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Tree `i` uses stream `derive(seed, i)` for its arm-stratified bootstrap
/// and feature sampling.
pub fn fit_uplift_forest(train: &Dataset, config: &UpliftForestConfig, seed: u64) -> Result<UpliftForest> {
    config.validate()?;
    check_both_arms(train)?;
    let (treated, control) = train.arm_indices();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(rng::derive(seed, i as u64));
            let rows: Vec<usize> = if config.bootstrap {
                let mut rows: Vec<usize> = (0..treated.len()).map(|_| treated[r.gen_range(0..treated.len())]).collect();
                rows.extend((0..control.len()).map(|_| control[r.gen_range(0..control.len())]));
                rows
            } else {
                (0..train.n_rows()).collect()
            };
            build_on_rows(train, rows, &config.tree, &mut r)
        })
        .collect();
    UpliftForest::from_trees(trees, train.n_features(), config.clone())
}

pub fn predict_uplift_forest(forest: &UpliftForest, x: &Matrix) -> Result<IteScores> {
    x.check_cols(forest.n_features)?;
    Ok(IteScores::new("uplift-rf", x.rows().map(|r| forest.predict_row(r)).collect()))
}
