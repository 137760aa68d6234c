use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, fit_tree_presorted, normalize_importance, Classifier, DecisionTree, Presorted, Samples, TreeError, TreeParams, VariableImportance};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub m_try: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Train every tree on a bootstrap resample. Disabling it is only useful
    /// for testing.
    pub bootstrap: bool,
}

impl ForestParams {
    pub fn new(n_trees: usize, m_try: usize) -> Self {
        ForestParams { n_trees, m_try, max_depth: None, min_samples_split: 2, bootstrap: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub n_trees: usize,
    pub m_try: usize,
    /// Seed of each tree's private stream (bootstrap and feature draws).
    pub tree_seeds: Vec<u64>,
    pub n_classes: usize,
}

/// Random forest: bootstrap resamples, `m_try` candidate features per split,
/// plurality vote.
///
/// Each tree gets a seed drawn from `rng` up front, so the trees can be grown
/// in parallel without changing the result. Bootstrap multiplicities are
/// passed to the tree as sample weights.
pub fn fit_forest(samples: &Samples, params: &ForestParams, rng: &mut impl Rng) -> Result<Forest, TreeError> {
    if params.n_trees == 0 {
        return Err(TreeError::Param("n_trees must be >= 1".into()));
    }
    let tree_params =
        TreeParams { max_depth: params.max_depth, min_samples_split: params.min_samples_split, m_try: Some(params.m_try) };
    tree_params.validate(samples.n_features())?;
    let seeds: Vec<u64> = (0..params.n_trees).map(|_| rng.next_u64()).collect();
    let presorted = Presorted::new(samples);
    let n = samples.len();
    let trees = seeds
        .par_iter()
        .map(|&seed| {
            let mut tree_rng = rng_from_seed(seed);
            let weights = if params.bootstrap {
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[tree_rng.random_range(0..n)] += 1.0;
                }
                w
            } else {
                vec![1.0; n]
            };
            fit_tree_presorted(samples, &presorted, &weights, &tree_params, &mut tree_rng)
        })
        .collect();
    Ok(Forest { trees, n_trees: params.n_trees, m_try: params.m_try, tree_seeds: seeds, n_classes: samples.n_classes() })
}

impl Forest {
    pub fn votes(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1.0;
        }
        votes
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serialises")
    }
}

impl Classifier for Forest {
    fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.votes(x))
    }
}

impl VariableImportance for Forest {
    fn variable_importance(&self) -> Vec<f64> {
        let n_features = self.trees.first().map_or(0, |t| t.n_features);
        let mut raw = vec![0.0; n_features];
        for t in &self.trees {
            for (acc, v) in raw.iter_mut().zip(t.split_fractions()) {
                *acc += v;
            }
        }
        normalize_importance(raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::tree::fit_tree;

    fn blobs(n: usize, seed: u64) -> Samples {
        let mut rng = rng_from_seed(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 3;
            rows.push(vec![c as f64 * 10.0 + rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]);
            labels.push(c);
        }
        Samples::new(&rows, &labels, 3).unwrap()
    }

    #[test]
    fn single_unbootstrapped_tree_equals_fit_tree() {
        let s = blobs(60, 1);
        let mut p = ForestParams::new(1, 3);
        p.bootstrap = false;
        let forest = fit_forest(&s, &p, &mut rng_from_seed(2)).unwrap();
        let tree = fit_tree(&s, None, &TreeParams::default(), &mut rng_from_seed(77)).unwrap();
        assert_eq!(forest.trees[0], tree);
        let probe = blobs(30, 9);
        assert_eq!(forest.predict_many(&probe), tree.predict_many(&probe));
    }

    #[test]
    fn separable_data_zero_training_error() {
        let s = blobs(90, 3);
        let forest = fit_forest(&s, &ForestParams::new(25, 1), &mut rng_from_seed(4)).unwrap();
        assert_eq!(forest.predict_many(&s), s.labels());
        assert_eq!(forest.trees.len(), 25);
        assert_eq!(forest.tree_seeds.len(), 25);
    }

    #[test]
    fn deterministic() {
        let s = blobs(90, 5);
        let a = fit_forest(&s, &ForestParams::new(10, 2), &mut rng_from_seed(6)).unwrap();
        let b = fit_forest(&s, &ForestParams::new(10, 2), &mut rng_from_seed(6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn importance_sums_to_one_and_favours_signal() {
        let s = blobs(150, 7);
        let forest = fit_forest(&s, &ForestParams::new(20, 3), &mut rng_from_seed(8)).unwrap();
        let imp = forest.variable_importance();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[0] > imp[1] && imp[0] > imp[2]);
    }

    #[test]
    fn zero_trees_rejected() {
        assert!(fit_forest(&blobs(9, 0), &ForestParams::new(0, 1), &mut rng_from_seed(0)).is_err());
    }
}
