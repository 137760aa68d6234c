//! Gini-trained classification trees and the two tree ensembles.
//!
//! Trees are grown greedily: every node tries candidate features, scans the
//! midpoints between consecutive distinct values and keeps the split with the
//! lowest weighted child Gini impurity. Ties go to the lowest feature index,
//! then the lowest threshold. Sample weights are honoured throughout, which
//! serves both bootstrap multiplicities and boosting weights.

mod forest;
mod samme;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::samples::Samples;
pub use forest::{fit_forest, Forest, ForestParams};
pub use samme::{fit_samme, samme_alpha, BoostEnsemble, SammeParams, SammeStop, PERFECT_ROUND_FACTOR};

/// Tolerance used when comparing impurities.
const IMPURITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("class counts are all zero")]
    ZeroCounts,
    #[error("weights length {0} does not match sample count {1}")]
    Weights(usize, usize),
    #[error("invalid parameter: {0}")]
    Param(String),
}

/// Anything that maps a feature vector to a class index.
pub trait Classifier {
    fn predict(&self, x: &[f64]) -> usize;

    fn predict_many(&self, samples: &Samples) -> Vec<usize> {
        (0..samples.len()).map(|i| self.predict(samples.row(i))).collect()
    }
}

/// Gini impurity `1 - Σ p²` of (possibly weighted) class counts.
pub fn gini(counts: &[f64]) -> Result<f64, TreeError> {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(TreeError::ZeroCounts);
    }
    Ok(1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>())
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted mean Gini impurity of the two children.
    pub impurity: f64,
}

/// Exhaustive best split of the positively weighted samples over the
/// `candidates` features; `None` if the node is pure or nothing improves on
/// the parent impurity.
pub fn best_split(samples: &Samples, weights: &[f64], candidates: &[usize]) -> Option<Split> {
    let idx: Vec<usize> = (0..samples.len()).filter(|&i| weights[i] > 0.0).collect();
    if idx.len() < 2 {
        return None;
    }
    let mut totals = vec![0.0; samples.n_classes];
    for &i in &idx {
        totals[samples.labels[i]] += weights[i];
    }
    let mut sorted_cands = candidates.to_vec();
    sorted_cands.sort_unstable();
    sorted_cands.dedup();
    let mut best: Option<Split> = None;
    let mut order = idx.clone();
    for &f in &sorted_cands {
        order.sort_by(|&a, &b| samples.value(a, f).total_cmp(&samples.value(b, f)).then(a.cmp(&b)));
        scan_feature(samples, weights, &order, f, &totals, &mut best);
    }
    let parent = gini(&totals).ok()?;
    best.filter(|s| s.impurity < parent - IMPURITY_EPS)
}

/// Scans one feature whose node samples are given in ascending value order and
/// updates `best` when a strictly better split appears.
fn scan_feature(
    samples: &Samples,
    weights: &[f64],
    order: &[usize],
    feature: usize,
    totals: &[f64],
    best: &mut Option<Split>,
) {
    let total_w: f64 = totals.iter().sum();
    let k = totals.len();
    let mut left = vec![0.0; k];
    let mut left_w = 0.0;
    for pos in 0..order.len() - 1 {
        let i = order[pos];
        left[samples.labels[i]] += weights[i];
        left_w += weights[i];
        let (x, next) = (samples.value(i, feature), samples.value(order[pos + 1], feature));
        if next <= x {
            continue;
        }
        let right_w = total_w - left_w;
        if left_w <= 0.0 || right_w <= 0.0 {
            continue;
        }
        let mut sq_left = 0.0;
        let mut sq_right = 0.0;
        for c in 0..k {
            sq_left += left[c] * left[c];
            let r = totals[c] - left[c];
            sq_right += r * r;
        }
        let impurity = 1.0 - (sq_left / left_w + sq_right / right_w) / total_w;
        if best.is_none_or(|b| impurity < b.impurity - IMPURITY_EPS) {
            *best = Some(Split { feature, threshold: x + (next - x) / 2.0, impurity });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features per split; `None` means all.
    pub m_try: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: None, min_samples_split: 2, m_try: None }
    }
}

impl TreeParams {
    pub fn validate(&self, n_features: usize) -> Result<(), TreeError> {
        if self.min_samples_split < 2 {
            return Err(TreeError::Param("min_samples_split must be >= 2".into()));
        }
        match self.m_try {
            Some(m) if m == 0 || m > n_features => {
                Err(TreeError::Param(format!("m_try must be in 1..={n_features}, got {m}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Share of the training weight reaching this node.
        fraction: f64,
    },
    Leaf {
        class: usize,
        counts: Vec<f64>,
        fraction: f64,
    },
}

impl Node {
    pub fn fraction(&self) -> f64 {
        match self {
            Node::Split { fraction, .. } | Node::Leaf { fraction, .. } => *fraction,
        }
    }
}

/// A fitted tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub n_classes: usize,
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    fn leaf_for(&self, x: &[f64]) -> &Node {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right, .. } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                leaf => return leaf,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Per feature, the summed training fraction of the nodes splitting on it.
    pub fn split_fractions(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_features];
        for n in &self.nodes {
            if let Node::Split { feature, fraction, .. } = n {
                out[*feature] += fraction;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialises")
    }
}

impl Classifier for DecisionTree {
    fn predict(&self, x: &[f64]) -> usize {
        match self.leaf_for(x) {
            Node::Leaf { class, .. } => *class,
            Node::Split { .. } => unreachable!("walk ends at a leaf"),
        }
    }
}

/// Per-feature ordering of all samples, shared between trees fitted on the
/// same data with different weights.
pub(crate) struct Presorted {
    order: Vec<Vec<usize>>,
}

impl Presorted {
    pub(crate) fn new(samples: &Samples) -> Self {
        let order = (0..samples.n_features)
            .map(|f| {
                let mut o: Vec<usize> = (0..samples.len()).collect();
                o.sort_by(|&a, &b| samples.value(a, f).total_cmp(&samples.value(b, f)).then(a.cmp(&b)));
                o
            })
            .collect();
        Presorted { order }
    }
}

struct Grower<'a, R: Rng> {
    samples: &'a Samples,
    weights: &'a [f64],
    params: TreeParams,
    rng: &'a mut R,
    total_weight: f64,
    /// `order[f][start..end]` are the node's samples sorted by feature `f`.
    order: Vec<Vec<usize>>,
    goes_left: Vec<bool>,
    scratch: Vec<usize>,
    nodes: Vec<Node>,
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let k = self.samples.n_classes;
        let mut counts = vec![0.0; k];
        for &i in &self.order[0][start..end] {
            counts[self.samples.labels[i]] += self.weights[i];
        }
        let node_w: f64 = counts.iter().sum();
        let fraction = node_w / self.total_weight;
        let id = self.nodes.len();
        let leaf = Node::Leaf { class: argmax(&counts), counts: counts.clone(), fraction };
        self.nodes.push(leaf);

        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let too_deep = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || too_deep || end - start < self.params.min_samples_split {
            return id;
        }
        let Some(split) = self.choose_split(start, end, &counts) else {
            return id;
        };

        for &i in &self.order[0][start..end] {
            self.goes_left[i] = self.samples.value(i, split.feature) <= split.threshold;
        }
        let mut mid = start;
        for f in 0..self.order.len() {
            self.scratch.clear();
            let slice = &mut self.order[f][start..end];
            let mut w = 0;
            for r in 0..slice.len() {
                let i = slice[r];
                if self.goes_left[i] {
                    slice[w] = i;
                    w += 1;
                } else {
                    self.scratch.push(i);
                }
            }
            slice[w..].copy_from_slice(&self.scratch);
            mid = start + w;
        }

        let left = self.grow(start, mid, depth + 1);
        let right = self.grow(mid, end, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right, fraction };
        id
    }

    /// Draws `m_try` candidate features; if none of them yields a valid split
    /// the remaining features are tried one at a time in random order.
    fn choose_split(&mut self, start: usize, end: usize, counts: &[f64]) -> Option<Split> {
        let d = self.samples.n_features;
        let parent = gini(counts).ok()?;
        let m = self.params.m_try.unwrap_or(d).min(d);
        let mut features: Vec<usize> = (0..d).collect();
        if m < d {
            features.shuffle(self.rng);
        }
        let mut tried = m;
        let mut cands: Vec<usize> = features[..m].to_vec();
        loop {
            cands.sort_unstable();
            let mut best = None;
            for &f in &cands {
                scan_feature(self.samples, self.weights, &self.order[f][start..end], f, counts, &mut best);
            }
            if let Some(s) = best.filter(|s| s.impurity < parent - IMPURITY_EPS) {
                return Some(s);
            }
            if tried >= d {
                return None;
            }
            cands.push(features[tried]);
            tried += 1;
        }
    }
}

pub(crate) fn fit_tree_presorted<R: Rng>(
    samples: &Samples,
    presorted: &Presorted,
    weights: &[f64],
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let order: Vec<Vec<usize>> =
        presorted.order.iter().map(|o| o.iter().copied().filter(|&i| weights[i] > 0.0).collect()).collect();
    let n = order.first().map_or(0, Vec::len);
    let total_weight: f64 = weights.iter().filter(|&&w| w > 0.0).sum();
    let mut grower = Grower {
        samples,
        weights,
        params: *params,
        rng,
        total_weight,
        order,
        goes_left: vec![false; samples.len()],
        scratch: Vec::with_capacity(n),
        nodes: Vec::new(),
    };
    if n == 0 {
        grower.nodes.push(Node::Leaf { class: 0, counts: vec![0.0; samples.n_classes], fraction: 0.0 });
    } else {
        grower.grow(0, n, 0);
    }
    DecisionTree { n_features: samples.n_features, n_classes: samples.n_classes, nodes: grower.nodes }
}

/// Fits a single tree. `weights` defaults to uniform when `None`.
pub fn fit_tree<R: Rng>(
    samples: &Samples,
    weights: Option<&[f64]>,
    params: &TreeParams,
    rng: &mut R,
) -> Result<DecisionTree, TreeError> {
    params.validate(samples.n_features)?;
    let uniform;
    let weights = match weights {
        Some(w) if w.len() != samples.len() => return Err(TreeError::Weights(w.len(), samples.len())),
        Some(w) => w,
        None => {
            uniform = vec![1.0; samples.len()];
            &uniform
        }
    };
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(TreeError::Param("weights must be finite and non-negative".into()));
    }
    let presorted = Presorted::new(samples);
    Ok(fit_tree_presorted(samples, &presorted, weights, params, rng))
}

/// Normalises per-feature sums to unit total; all zeros stay zeros.
pub(crate) fn normalize_importance(mut raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter_mut().for_each(|v| *v /= total);
    }
    raw
}

/// Models whose splits can be accounted per feature.
pub trait VariableImportance {
    /// Tree-weighted sum of split-node training fractions per feature,
    /// normalised to sum to one (all zeros if no tree ever split).
    fn variable_importance(&self) -> Vec<f64>;
}

impl VariableImportance for DecisionTree {
    fn variable_importance(&self) -> Vec<f64> {
        normalize_importance(self.split_fractions())
    }
}
