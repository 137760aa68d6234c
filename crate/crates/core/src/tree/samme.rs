use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, fit_tree_presorted, normalize_importance, Classifier, DecisionTree, Presorted, Samples, TreeError, TreeParams, VariableImportance};

/// A perfect weak learner gets `ln(PERFECT_ROUND_FACTOR * (K - 1))`.
pub const PERFECT_ROUND_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SammeParams {
    pub rounds: usize,
    pub weak: TreeParams,
}

impl SammeParams {
    pub fn new(rounds: usize) -> Self {
        SammeParams { rounds, weak: TreeParams { max_depth: Some(3), ..TreeParams::default() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SammeStop {
    /// All requested rounds were run.
    Completed,
    /// A weak learner classified the weighted sample perfectly.
    Perfect,
    /// A weak learner was no better than chance; it was discarded.
    NoBetterThanChance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostEnsemble {
    /// Retained weak learners with their weights, all positive.
    pub rounds: Vec<(DecisionTree, f64)>,
    pub n_classes: usize,
    /// Weighted training error of each retained round.
    pub round_errors: Vec<f64>,
    pub stop: SammeStop,
    /// Prediction when no round was retained: the majority training class.
    pub fallback_class: usize,
}

/// SAMME round weight `ln((1 - err) / err) + ln(K - 1)`, or `None` when the
/// learner is no better than guessing (`err >= 1 - 1/K`). `err = 0` gives the
/// capped weight.
pub fn samme_alpha(err: f64, n_classes: usize) -> Option<f64> {
    let k = n_classes as f64;
    let chance = (k - 1.0) / k;
    if err >= chance - 1e-12 {
        return None;
    }
    if err <= 0.0 {
        return Some((PERFECT_ROUND_FACTOR * (k - 1.0)).ln());
    }
    Some(((1.0 - err) / err).ln() + (k - 1.0).ln())
}

/// Multiclass AdaBoost (SAMME) with weighted weak trees.
pub fn fit_samme(samples: &Samples, params: &SammeParams, rng: &mut impl Rng) -> Result<BoostEnsemble, TreeError> {
    if params.rounds == 0 {
        return Err(TreeError::Param("rounds must be >= 1".into()));
    }
    let k = samples.n_classes();
    if k < 2 {
        return Err(TreeError::Param("boosting needs at least two classes".into()));
    }
    params.weak.validate(samples.n_features())?;
    let n = samples.len();
    let presorted = Presorted::new(samples);
    let mut weights = vec![1.0 / n as f64; n];

    let mut class_w = vec![0.0; k];
    for &l in samples.labels() {
        class_w[l] += 1.0;
    }
    let mut ensemble = BoostEnsemble {
        rounds: Vec::new(),
        n_classes: k,
        round_errors: Vec::new(),
        stop: SammeStop::Completed,
        fallback_class: argmax(&class_w),
    };

    for _ in 0..params.rounds {
        let tree = fit_tree_presorted(samples, &presorted, &weights, &params.weak, rng);
        let miss: Vec<bool> = (0..n).map(|i| tree.predict(samples.row(i)) != samples.labels()[i]).collect();
        let total: f64 = weights.iter().sum();
        let err = miss.iter().zip(&weights).filter(|(m, _)| **m).map(|(_, w)| w).sum::<f64>() / total;
        let Some(alpha) = samme_alpha(err, k) else {
            ensemble.stop = SammeStop::NoBetterThanChance;
            break;
        };
        ensemble.rounds.push((tree, alpha));
        ensemble.round_errors.push(err);
        if err <= 0.0 {
            ensemble.stop = SammeStop::Perfect;
            break;
        }
        let boost = alpha.exp();
        for (w, m) in weights.iter_mut().zip(&miss) {
            if *m {
                *w *= boost;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(ensemble)
}

impl BoostEnsemble {
    /// Class scores `Σ α_m [tree_m predicts c]` using the first `rounds` learners.
    pub fn scores_with(&self, x: &[f64], rounds: usize) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for (tree, alpha) in self.rounds.iter().take(rounds) {
            s[tree.predict(x)] += alpha;
        }
        s
    }

    pub fn predict_with(&self, x: &[f64], rounds: usize) -> usize {
        if self.rounds.is_empty() || rounds == 0 {
            return self.fallback_class;
        }
        argmax(&self.scores_with(x, rounds))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ensemble serialises")
    }
}

impl Classifier for BoostEnsemble {
    fn predict(&self, x: &[f64]) -> usize {
        self.predict_with(x, self.rounds.len())
    }
}

impl VariableImportance for BoostEnsemble {
    fn variable_importance(&self) -> Vec<f64> {
        let n_features = self.rounds.first().map_or(0, |(t, _)| t.n_features);
        let mut raw = vec![0.0; n_features];
        for (tree, alpha) in &self.rounds {
            for (acc, v) in raw.iter_mut().zip(tree.split_fractions()) {
                *acc += alpha * v;
            }
        }
        normalize_importance(raw)
    }
}
