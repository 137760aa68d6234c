//! Cross-validation harness, metrics and null models.

mod crossval;
mod importance;
mod sweep;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

pub use crossval::{cross_validate, fold_samples, ClassifierKind, ClassifierSpec, CvOutcome, FittedModel, FoldResult, MetricReport, Mode, SpecOverrides};
pub use importance::{aggregate_importance, ImportanceReport};
pub use sweep::{sweep, SweepGrid, SweepRow, SweepTable};

use crate::dataset::DatasetError;
use crate::sensor::ScenarioLabel;
use crate::tree::argmax;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("fold {fold}: {message}")]
    Fold { fold: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("invalid classifier settings: {0}")]
    Spec(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("grid point {point}: {source}")]
    GridPoint { point: String, source: Box<EvalError> },
    #[error("{0} has no variable importances")]
    NoImportance(ClassifierKind),
}

/// Plurality label; ties go to the lowest class index.
pub fn experiment_vote(predictions: &[usize]) -> usize {
    assert!(!predictions.is_empty(), "vote over an empty experiment");
    let k = predictions.iter().max().copied().unwrap_or(0) + 1;
    let mut counts = vec![0.0; k];
    for &p in predictions {
        counts[p] += 1.0;
    }
    argmax(&counts)
}

/// Fraction of mismatched labels.
pub fn misclassification_error(predictions: &[usize], labels: &[usize]) -> f64 {
    assert_eq!(predictions.len(), labels.len(), "prediction and label counts differ");
    assert!(!labels.is_empty(), "error of an empty set");
    let wrong = predictions.iter().zip(labels).filter(|(p, l)| p != l).count();
    wrong as f64 / labels.len() as f64
}

/// Mean and 95% half-width of a set of fold values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Interval {
    /// `mean ± half-width` with three decimals, as printed in result tables.
    pub fn display(&self) -> String {
        format!("{:.3} ± {:.3}", self.mean, self.half_width)
    }
}

/// `mean ± t_{(1+level)/2, n-1} · s / √n` with the sample SD `s`.
pub fn t_confidence_interval(values: &[f64], level: f64) -> Interval {
    let n = values.len();
    assert!(n >= 2, "a t-interval needs at least two values");
    assert!(level > 0.0 && level < 1.0, "level must be in (0, 1)");
    if values.iter().all(|v| *v == values[0]) {
        return Interval { mean: values[0], half_width: 0.0, n };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid t").inverse_cdf(0.5 + level / 2.0);
    Interval { mean, half_width: t * var.sqrt() / (n as f64).sqrt(), n }
}

/// Confusion counts with scenario 2 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub f1: f64,
    /// `None` when a confusion-matrix margin is zero.
    pub mcc: Option<f64>,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn metrics(&self) -> BinaryMetrics {
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let accuracy = (tp + tn) / self.total() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        let mcc = (denom > 0.0).then(|| (tp * tn - fp * fn_) / denom.sqrt());
        BinaryMetrics { confusion: *self, accuracy, f1, mcc }
    }
}

/// Binary metrics over scenario labels 1 (negative) and 2 (positive).
pub fn binary_metrics(predictions: &[usize], labels: &[usize]) -> BinaryMetrics {
    assert_eq!(predictions.len(), labels.len(), "prediction and label counts differ");
    assert!(!labels.is_empty(), "metrics of an empty set");
    let pos = ScenarioLabel::WalkAround.index();
    let mut c = Confusion::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p == pos, l == pos) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c.metrics()
}

/// Relative class frequencies of `labels` over `0..n_classes`.
pub fn class_frequencies(labels: &[usize], n_classes: usize) -> Vec<f64> {
    let mut f = vec![0.0; n_classes];
    for &l in labels {
        f[l] += 1.0;
    }
    let n = labels.len() as f64;
    f.iter_mut().for_each(|v| *v /= n);
    f
}

/// Trivial null model: the modal training class, lowest index on ties,
/// for every validation observation.
pub fn null_trivial(train_labels: &[usize], n_classes: usize, n_validation: usize) -> Vec<usize> {
    assert!(!train_labels.is_empty(), "empty training set");
    vec![argmax(&class_frequencies(train_labels, n_classes)); n_validation]
}

/// Random null model: independent draws from the training class frequencies.
pub fn null_random(train_labels: &[usize], n_classes: usize, n_validation: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert!(!train_labels.is_empty(), "empty training set");
    draw_from_frequencies(&class_frequencies(train_labels, n_classes), n_validation, rng)
}

/// Independent draws from a class distribution by inverse CDF.
pub(crate) fn draw_from_frequencies(frequencies: &[f64], n: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut last = 0;
            for (c, &p) in frequencies.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                last = c;
                acc += p;
                if u < acc {
                    return c;
                }
            }
            last
        })
        .collect()
}

/// Expected error of the random null model when train and validation share
/// the class frequencies `p`: `1 - Σ p_c²`.
pub fn random_null_expected_error(p: &[f64]) -> f64 {
    1.0 - p.iter().map(|v| v * v).sum::<f64>()
}
