//! Least-squares CART used by the random forest and gradient boosting.
//!
//! On 0/1 targets the squared-error reduction is half the Gini reduction, so
//! the same builder serves classification forests. Candidate thresholds are
//! midpoints between consecutive distinct values; equal gains keep the
//! earlier (lower feature index, lower threshold) candidate.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: usize,
}

/// Mean that is exact when all values are equal.
pub(crate) fn stable_mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    let (mut acc, mut n) = (0.0, 1.0);
    for v in it {
        acc += v - first;
        n += 1.0;
    }
    first + acc / n
}

impl Tree {
    /// Root is `nodes[0]`; child indices must point forward.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidData("tree needs at least one node".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = *n {
                if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return Err(Error::InvalidData(format!("node {i} has invalid children")));
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn leaf(value: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value }] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub(crate) fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Fit on `rows` (duplicates allowed, e.g. a bootstrap sample).
    pub fn fit<R: Rng>(x: &Matrix, target: &[f64], rows: Vec<usize>, params: &TreeParams, rng: &mut R) -> Tree {
        let mut nodes = Vec::new();
        grow(x, target, rows, 0, params, rng, &mut nodes);
        Tree { nodes }
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split<R: Rng>(x: &Matrix, target: &[f64], rows: &[usize], params: &TreeParams, rng: &mut R) -> Option<Candidate> {
    let d = x.n_cols();
    let k = params.features_per_split.clamp(1, d);
    let mut features = sample(rng, d, k).into_vec();
    features.sort_unstable();

    let n = rows.len() as f64;
    let total: f64 = rows.iter().map(|&r| target[r]).sum();
    let parent_score = total * total / n;
    let min_leaf = params.min_leaf.max(1);

    let mut best: Option<Candidate> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for &f in &features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x.get(r, f), r)));
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut left_sum = 0.0;
        for i in 0..sorted.len() - 1 {
            left_sum += target[sorted[i].1];
            let n_left = i + 1;
            let n_right = sorted.len() - n_left;
            if n_left < min_leaf {
                continue;
            }
            if n_right < min_leaf {
                break;
            }
            let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
            if lo == hi {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - parent_score;
            if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                best = Some(Candidate { feature: f, threshold: lo + (hi - lo) / 2.0, gain });
            }
        }
    }
    best
}

fn grow<R: Rng>(
    x: &Matrix,
    target: &[f64],
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut R,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    let value = stable_mean(rows.iter().map(|&r| target[r]));
    nodes.push(Node::Leaf { value });

    let pure = rows.iter().all(|&r| target[r] == target[rows[0]]);
    if depth >= params.max_depth || pure || rows.len() < 2 * params.min_leaf.max(1) {
        return id;
    }
    let Some(split) = best_split(x, target, &rows, params, rng) else {
        return id;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&r| x.get(r, split.feature) <= split.threshold);
    let left = grow(x, target, left_rows, depth + 1, params, rng, nodes);
    let right = grow(x, target, right_rows, depth + 1, params, rng, nodes);
    nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
    id
}
