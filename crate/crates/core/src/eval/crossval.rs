use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::importance::{aggregate_importance, ImportanceReport};
use super::{binary_metrics, experiment_vote, misclassification_error, null_trivial, t_confidence_interval, BinaryMetrics, EvalError, Interval};
use crate::dataset::{compute_stats, normalize};
use crate::dataset::{Dataset, FoldPlan};
use crate::linear::{fit_logreg, FitParams, LogRegModel, Penalty, PenaltyKind};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::samples::Samples;
use crate::sensor::{ScenarioLabel, N_SENSORS};
use crate::tree::{fit_forest, Forest, ForestParams};
use crate::tree::{fit_samme, BoostEnsemble, SammeParams};
use crate::tree::{Classifier, VariableImportance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Forest,
    Samme,
    Logreg,
    Trivial,
    Random,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] =
        [ClassifierKind::Forest, ClassifierKind::Samme, ClassifierKind::Logreg, ClassifierKind::Trivial, ClassifierKind::Random];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Forest => "forest",
            ClassifierKind::Samme => "samme",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Trivial => "trivial",
            ClassifierKind::Random => "random",
        }
    }

    pub fn is_null(self) -> bool {
        matches!(self, ClassifierKind::Trivial | ClassifierKind::Random)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let valid: Vec<&str> = ClassifierKind::ALL.iter().map(|k| k.name()).collect();
            EvalError::Spec(format!("unknown classifier `{s}`; valid kinds: {}", valid.join(", ")))
        })
    }
}

/// A classifier kind with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Forest(ForestParams),
    Samme(SammeParams),
    Logreg { penalty: Penalty, fit: FitParams },
    Trivial,
    Random,
}

/// Hyperparameter overrides on top of [`ClassifierSpec::default_for`].
/// Each field belongs to one classifier kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpecOverrides {
    pub n_trees: Option<usize>,
    pub m_try: Option<usize>,
    pub rounds: Option<usize>,
    pub depth: Option<usize>,
    pub penalty: Option<PenaltyKind>,
    pub lambda: Option<f64>,
}

impl SpecOverrides {
    /// Names of the fields that are set but do not belong to `kind`.
    pub fn foreign_to(&self, kind: ClassifierKind) -> Vec<&'static str> {
        let owned = [
            ("n_trees", self.n_trees.is_some(), ClassifierKind::Forest),
            ("m_try", self.m_try.is_some(), ClassifierKind::Forest),
            ("rounds", self.rounds.is_some(), ClassifierKind::Samme),
            ("depth", self.depth.is_some(), ClassifierKind::Samme),
            ("penalty", self.penalty.is_some(), ClassifierKind::Logreg),
            ("lambda", self.lambda.is_some(), ClassifierKind::Logreg),
        ];
        owned.iter().filter(|(_, set, owner)| *set && *owner != kind).map(|(name, ..)| *name).collect()
    }
}

impl ClassifierSpec {
    /// Defaults: 100 trees with 4 candidate features, 100 boosting rounds
    /// of depth-3 trees, L2 logistic regression with λ = 1e-4.
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Forest => ClassifierSpec::Forest(ForestParams::new(100, 4)),
            ClassifierKind::Samme => ClassifierSpec::Samme(SammeParams::new(100)),
            ClassifierKind::Logreg => {
                ClassifierSpec::Logreg { penalty: Penalty::l2(1e-4).expect("positive"), fit: FitParams::default() }
            }
            ClassifierKind::Trivial => ClassifierSpec::Trivial,
            ClassifierKind::Random => ClassifierSpec::Random,
        }
    }

    /// Defaults of `kind` with `overrides` applied, validated. Overrides
    /// that belong to another kind are rejected.
    pub fn with_overrides(kind: ClassifierKind, overrides: &SpecOverrides) -> Result<Self, EvalError> {
        if let Some(name) = overrides.foreign_to(kind).first() {
            return Err(EvalError::Spec(format!("`{name}` does not apply to {kind}")));
        }
        let mut spec = Self::default_for(kind);
        match &mut spec {
            ClassifierSpec::Forest(p) => {
                p.n_trees = overrides.n_trees.unwrap_or(p.n_trees);
                p.m_try = overrides.m_try.unwrap_or(p.m_try);
            }
            ClassifierSpec::Samme(p) => {
                p.rounds = overrides.rounds.unwrap_or(p.rounds);
                if let Some(d) = overrides.depth {
                    p.weak.max_depth = Some(d);
                }
            }
            ClassifierSpec::Logreg { penalty, .. } => {
                *penalty = Penalty::new(
                    overrides.penalty.unwrap_or(penalty.kind),
                    overrides.lambda.unwrap_or(penalty.lambda),
                )
                .map_err(|e| EvalError::Spec(e.to_string()))?;
            }
            ClassifierSpec::Trivial | ClassifierSpec::Random => {}
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::Forest(_) => ClassifierKind::Forest,
            ClassifierSpec::Samme(_) => ClassifierKind::Samme,
            ClassifierSpec::Logreg { .. } => ClassifierKind::Logreg,
            ClassifierSpec::Trivial => ClassifierKind::Trivial,
            ClassifierSpec::Random => ClassifierKind::Random,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::Spec(m));
        match self {
            ClassifierSpec::Forest(p) => {
                if p.n_trees == 0 {
                    return bad("n_trees must be >= 1".into());
                }
                if p.m_try == 0 || p.m_try > N_SENSORS {
                    return bad(format!("m_try must be in 1..={N_SENSORS}, got {}", p.m_try));
                }
                if p.min_samples_split < 2 {
                    return bad("min_samples_split must be >= 2".into());
                }
            }
            ClassifierSpec::Samme(p) => {
                if p.rounds == 0 {
                    return bad("rounds must be >= 1".into());
                }
                p.weak.validate(N_SENSORS).map_err(|e| EvalError::Spec(e.to_string()))?;
            }
            ClassifierSpec::Logreg { penalty, fit } => {
                Penalty::new(penalty.kind, penalty.lambda).map_err(|e| EvalError::Spec(e.to_string()))?;
                if fit.max_iter == 0 || !(fit.tol >= 0.0) {
                    return bad("max_iter must be >= 1 and tol >= 0".into());
                }
            }
            ClassifierSpec::Trivial | ClassifierSpec::Random => {}
        }
        Ok(())
    }

    /// Fits the classifier; `rng` drives every random choice.
    pub fn fit(&self, samples: &Samples, rng: &mut Rng) -> Result<FittedModel, String> {
        let k = samples.n_classes();
        Ok(match self {
            ClassifierSpec::Forest(p) => FittedModel::Forest(fit_forest(samples, p, rng).map_err(|e| e.to_string())?),
            ClassifierSpec::Samme(p) => FittedModel::Samme(fit_samme(samples, p, rng).map_err(|e| e.to_string())?),
            ClassifierSpec::Logreg { penalty, fit } => {
                FittedModel::Logreg(fit_logreg(samples, penalty, fit).map_err(|e| e.to_string())?)
            }
            ClassifierSpec::Trivial => {
                FittedModel::Trivial { class: null_trivial(samples.labels(), k, 1)[0], n_classes: k }
            }
            ClassifierSpec::Random => {
                FittedModel::Random { frequencies: super::class_frequencies(samples.labels(), k) }
            }
        })
    }
}

/// A fitted model of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedModel {
    Forest(Forest),
    Samme(BoostEnsemble),
    Logreg(LogRegModel),
    Trivial { class: usize, n_classes: usize },
    Random { frequencies: Vec<f64> },
}

impl FittedModel {
    /// Predicts every row; only the random null model consumes `rng`.
    pub fn predict_all(&self, samples: &Samples, rng: &mut Rng) -> Vec<usize> {
        match self {
            FittedModel::Forest(m) => m.predict_many(samples),
            FittedModel::Samme(m) => m.predict_many(samples),
            FittedModel::Logreg(m) => m.predict_many(samples),
            FittedModel::Trivial { class, .. } => vec![*class; samples.len()],
            FittedModel::Random { frequencies } => super::draw_from_frequencies(frequencies, samples.len(), rng),
        }
    }

    /// Normalised split importances for tree models.
    pub fn importance(&self) -> Option<Vec<f64>> {
        match self {
            FittedModel::Forest(m) => Some(m.variable_importance()),
            FittedModel::Samme(m) => Some(m.variable_importance()),
            _ => None,
        }
    }

    /// Coefficient rows (weights then intercept) for logistic models.
    pub fn coefficients(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            FittedModel::Logreg(m) => Some(
                m.weights.iter().zip(&m.intercepts).map(|(w, b)| w.iter().copied().chain([*b]).collect()).collect(),
            ),
            _ => None,
        }
    }

    pub fn warning(&self) -> bool {
        matches!(self, FittedModel::Logreg(m) if m.warning())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Which scenarios take part and how they map to model labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// All three scenarios, labels 0, 1, 2.
    #[serde(rename = "3class")]
    ThreeClass,
    /// Walk-across (label 0) against walk-around (label 1).
    #[serde(rename = "2class")]
    TwoClass,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ThreeClass => "3class",
            Mode::TwoClass => "2class",
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            Mode::ThreeClass => 3,
            Mode::TwoClass => 2,
        }
    }

    /// Model label of a scenario, `None` if the mode excludes it.
    pub fn label_of(self, scenario: ScenarioLabel) -> Option<usize> {
        match (self, scenario) {
            (Mode::ThreeClass, s) => Some(s.index()),
            (Mode::TwoClass, ScenarioLabel::EmptyRoom) => None,
            (Mode::TwoClass, s) => Some(s.index() - 1),
        }
    }

    /// Scenario index of a model label.
    pub fn scenario_of(self, label: usize) -> usize {
        match self {
            Mode::ThreeClass => label,
            Mode::TwoClass => label + 1,
        }
    }

    pub fn class_names(self) -> Vec<String> {
        (0..self.n_classes()).map(|l| format!("scenario_{}", self.scenario_of(l))).collect()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "3class" => Ok(Mode::ThreeClass),
            "2class" => Ok(Mode::TwoClass),
            other => Err(EvalError::Spec(format!("unknown mode `{other}`; valid modes: 3class, 2class"))),
        }
    }
}

/// Normalised feature rows of the given experiments, restricted to the
/// scenarios of `mode`. Also returns each kept experiment's id and row range.
pub fn fold_samples(
    dataset: &Dataset,
    ids: &[u32],
    stats: &crate::dataset::NormalizationStats,
    mode: Mode,
) -> (Samples, Vec<(u32, Range<usize>)>) {
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut spans = Vec::new();
    for &id in ids {
        let e = dataset.get(id).expect("fold ids come from the dataset");
        let Some(label) = mode.label_of(e.scenario) else { continue };
        let start = labels.len();
        for o in &e.observations {
            values.extend_from_slice(&normalize(o, stats));
            labels.push(label);
        }
        spans.push((id, start..labels.len()));
    }
    let samples = if labels.is_empty() {
        Samples::from_flat(vec![0.0; N_SENSORS], N_SENSORS, vec![0], mode.n_classes())
    } else {
        Samples::from_flat(values, N_SENSORS, labels, mode.n_classes())
    };
    (samples.expect("well-formed rows"), spans)
}

/// Training and validation data of one fold, normalised with statistics
/// from the training side only.
pub(crate) struct PreparedFold {
    pub index: usize,
    pub train: Samples,
    pub validation: Samples,
    pub spans: Vec<(u32, Range<usize>)>,
}

fn in_mode(dataset: &Dataset, ids: &[u32], mode: Mode) -> Vec<u32> {
    ids.iter().copied().filter(|&id| dataset.get(id).is_some_and(|e| mode.label_of(e.scenario).is_some())).collect()
}

pub(crate) fn prepare_folds(dataset: &Dataset, plan: &FoldPlan, mode: Mode) -> Result<Vec<PreparedFold>, EvalError> {
    let all: Vec<u32> = dataset.experiments.iter().map(|e| e.id).collect();
    for f in &plan.folds {
        if let Some(bad) = f.validation.iter().chain(&f.training).find(|id| dataset.get(**id).is_none()) {
            return Err(EvalError::Spec(format!("fold plan references unknown experiment {bad}")));
        }
        if f.validation.len() + f.training.len() != all.len() {
            return Err(EvalError::Spec("fold plan does not partition the dataset".into()));
        }
    }
    plan.folds
        .iter()
        .enumerate()
        .map(|(index, f)| {
            let train_ids = in_mode(dataset, &f.training, mode);
            let val_ids = in_mode(dataset, &f.validation, mode);
            if train_ids.is_empty() || val_ids.is_empty() {
                return Err(EvalError::Fold { fold: index, message: "empty training or validation side".into() });
            }
            let stats = compute_stats(train_ids.iter().flat_map(|id| &dataset.get(*id).expect("checked").observations))
                .map_err(|e| EvalError::Fold { fold: index, message: e.to_string() })?;
            let (train, _) = fold_samples(dataset, &train_ids, &stats, mode);
            let (validation, spans) = fold_samples(dataset, &val_ids, &stats, mode);
            Ok(PreparedFold { index, train, validation, spans })
        })
        .collect()
}

/// Outcome of one validation fold, labels given as scenario indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub observation_predictions: Vec<usize>,
    pub observation_labels: Vec<usize>,
    pub experiment_ids: Vec<u32>,
    pub experiment_predictions: Vec<usize>,
    pub experiment_labels: Vec<usize>,
    pub observation_error: f64,
    pub experiment_error: f64,
    /// Binary metrics at observation and experiment level (2-class mode).
    pub observation_binary: Option<BinaryMetrics>,
    pub experiment_binary: Option<BinaryMetrics>,
    pub importance: Option<Vec<f64>>,
    pub coefficients: Option<Vec<Vec<f64>>>,
    /// The optimiser hit its iteration cap.
    pub warning: bool,
}

impl FoldResult {
    /// Observation-level confusion matrix indexed by `[label][prediction]`.
    pub fn confusion_matrix(&self) -> [[usize; 3]; 3] {
        let mut m = [[0; 3]; 3];
        for (&p, &l) in self.observation_predictions.iter().zip(&self.observation_labels) {
            m[l][p] += 1;
        }
        m
    }
}

pub(crate) fn score_fold(prep: &PreparedFold, predictions: &[usize], mode: Mode) -> FoldResult {
    let observation_predictions: Vec<usize> = predictions.iter().map(|&p| mode.scenario_of(p)).collect();
    let observation_labels: Vec<usize> = prep.validation.labels().iter().map(|&l| mode.scenario_of(l)).collect();
    let mut experiment_ids = Vec::new();
    let mut experiment_predictions = Vec::new();
    let mut experiment_labels = Vec::new();
    for (id, span) in &prep.spans {
        experiment_ids.push(*id);
        experiment_predictions.push(experiment_vote(&observation_predictions[span.clone()]));
        experiment_labels.push(observation_labels[span.start]);
    }
    let binary = mode == Mode::TwoClass;
    FoldResult {
        fold: prep.index,
        observation_error: misclassification_error(&observation_predictions, &observation_labels),
        experiment_error: misclassification_error(&experiment_predictions, &experiment_labels),
        observation_binary: binary.then(|| binary_metrics(&observation_predictions, &observation_labels)),
        experiment_binary: binary.then(|| binary_metrics(&experiment_predictions, &experiment_labels)),
        observation_predictions,
        observation_labels,
        experiment_ids,
        experiment_predictions,
        experiment_labels,
        importance: None,
        coefficients: None,
        warning: false,
    }
}

/// Accuracy, F1 and MCC summarised across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinarySummary {
    pub accuracy: Interval,
    pub f1: Interval,
    /// Over the folds where MCC is defined; `None` if fewer than two are.
    pub mcc: Option<Interval>,
    pub mcc_defined_folds: usize,
}

impl BinarySummary {
    fn from_metrics(m: &[BinaryMetrics]) -> Self {
        let acc: Vec<f64> = m.iter().map(|b| b.accuracy).collect();
        let f1: Vec<f64> = m.iter().map(|b| b.f1).collect();
        let mcc: Vec<f64> = m.iter().filter_map(|b| b.mcc).collect();
        BinarySummary {
            accuracy: t_confidence_interval(&acc, 0.95),
            f1: t_confidence_interval(&f1, 0.95),
            mcc: (mcc.len() >= 2).then(|| t_confidence_interval(&mcc, 0.95)),
            mcc_defined_folds: mcc.len(),
        }
    }

    fn cells(&self) -> [String; 3] {
        [self.accuracy.display(), self.f1.display(), self.mcc.map_or_else(|| "---".to_string(), |m| m.display())]
    }
}

/// Cross-validated summary of one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub spec: ClassifierSpec,
    pub mode: Mode,
    pub n_folds: usize,
    pub observation_error: Interval,
    pub experiment_error: Interval,
    pub observation_binary: Option<BinarySummary>,
    pub experiment_binary: Option<BinarySummary>,
    pub importance: Option<ImportanceReport>,
    /// Folds whose optimiser hit its iteration cap.
    pub warnings: usize,
}

impl MetricReport {
    pub fn from_folds(spec: &ClassifierSpec, mode: Mode, folds: &[FoldResult]) -> Self {
        let obs: Vec<f64> = folds.iter().map(|f| f.observation_error).collect();
        let exp: Vec<f64> = folds.iter().map(|f| f.experiment_error).collect();
        let binary = |get: fn(&FoldResult) -> Option<BinaryMetrics>| {
            let m: Option<Vec<BinaryMetrics>> = folds.iter().map(get).collect();
            m.map(|m| BinarySummary::from_metrics(&m))
        };
        MetricReport {
            spec: *spec,
            mode,
            n_folds: folds.len(),
            observation_error: t_confidence_interval(&obs, 0.95),
            experiment_error: t_confidence_interval(&exp, 0.95),
            observation_binary: binary(|f| f.observation_binary),
            experiment_binary: binary(|f| f.experiment_binary),
            importance: aggregate_importance(folds, mode).ok(),
            warnings: folds.iter().filter(|f| f.warning).count(),
        }
    }

    /// Column names of [`MetricReport::table_row`] for `mode`.
    pub fn table_header(mode: Mode) -> &'static str {
        match mode {
            Mode::ThreeClass => "classifier,obs_error,exp_error",
            Mode::TwoClass => "classifier,obs_accuracy,obs_f1,obs_mcc,exp_accuracy,exp_f1,exp_mcc,obs_error,exp_error",
        }
    }

    /// One results-table row; cells read `mean ± half-width`, undefined
    /// MCC reads `---`.
    pub fn table_row(&self) -> String {
        let mut cells = vec![self.spec.kind().to_string()];
        if let (Some(o), Some(e)) = (&self.observation_binary, &self.experiment_binary) {
            cells.extend(o.cells());
            cells.extend(e.cells());
        }
        cells.push(self.observation_error.display());
        cells.push(self.experiment_error.display());
        cells.join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::table_header(self.mode), self.table_row())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub folds: Vec<FoldResult>,
    pub report: MetricReport,
}

/// k-fold cross-validation of `spec` over `plan`.
///
/// Fold `i` draws from the stream `derive_seed(seed, i)`, so results do not
/// depend on the order in which folds run.
pub fn cross_validate(
    dataset: &Dataset,
    spec: &ClassifierSpec,
    plan: &FoldPlan,
    mode: Mode,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    spec.validate()?;
    if plan.folds.len() < 2 {
        return Err(EvalError::Spec(format!("need at least 2 folds, got {}", plan.folds.len())));
    }
    let prepared = prepare_folds(dataset, plan, mode)?;
    let folds = prepared
        .par_iter()
        .map(|prep| {
            let mut rng = rng_from_seed(derive_seed(seed, prep.index as u64));
            let model =
                spec.fit(&prep.train, &mut rng).map_err(|message| EvalError::Fold { fold: prep.index, message })?;
            let predictions = model.predict_all(&prep.validation, &mut rng);
            let mut result = score_fold(prep, &predictions, mode);
            result.importance = model.importance();
            result.coefficients = model.coefficients();
            result.warning = model.warning();
            Ok(result)
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let report = MetricReport::from_folds(spec, mode, &folds);
    Ok(CvOutcome { folds, report })
}


#[cfg(test)]
mod tests {
    use super::tests_support::toy_dataset;
    use super::*;
    use crate::dataset::make_folds;

    #[test]
    fn kinds_parse() {
        assert_eq!("forest".parse::<ClassifierKind>().unwrap(), ClassifierKind::Forest);
        let err = "svm".parse::<ClassifierKind>().unwrap_err().to_string();
        assert!(err.contains("forest, samme, logreg, trivial, random"), "{err}");
        assert_eq!("2class".parse::<Mode>().unwrap(), Mode::TwoClass);
    }

    #[test]
    fn trivial_experiment_error_is_two_thirds() {
        let d = toy_dataset();
        let plan = make_folds(&d, 10, &mut rng_from_seed(1)).unwrap();
        let out = cross_validate(&d, &ClassifierSpec::Trivial, &plan, Mode::ThreeClass, 0).unwrap();
        assert_eq!(out.report.n_folds, 10);
        for f in &out.folds {
            assert_eq!(f.experiment_ids.len(), 15);
            assert!((f.experiment_error - 2.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(out.report.experiment_error.half_width, 0.0);
        assert!(out.report.to_csv().contains("0.667 ± 0.000"));

        let two = cross_validate(&d, &ClassifierSpec::Trivial, &plan, Mode::TwoClass, 0).unwrap();
        for f in &two.folds {
            assert_eq!(f.experiment_ids.len(), 10);
            assert!(f.observation_labels.iter().all(|&l| l != 0));
            assert_eq!(f.experiment_binary.unwrap().accuracy, 0.5);
            assert_eq!(f.experiment_binary.unwrap().mcc, None);
        }
        assert!(two.report.to_csv().contains("---"));
    }

    #[test]
    fn forest_separates_toy_data_deterministically() {
        let d = toy_dataset();
        let plan = make_folds(&d, 10, &mut rng_from_seed(2)).unwrap();
        let spec = ClassifierSpec::Forest(ForestParams::new(10, 3));
        let a = cross_validate(&d, &spec, &plan, Mode::ThreeClass, 5).unwrap();
        let b = cross_validate(&d, &spec, &plan, Mode::ThreeClass, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.report.observation_error.mean < 0.05);
        for f in &a.folds {
            let total: usize = f.confusion_matrix().iter().flatten().sum();
            assert_eq!(total, f.observation_predictions.len());
        }
        let imp = a.report.importance.as_ref().unwrap();
        assert!((imp.importance.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn votes_follow_observation_predictions() {
        let d = toy_dataset();
        let plan = make_folds(&d, 10, &mut rng_from_seed(3)).unwrap();
        let out = cross_validate(&d, &ClassifierSpec::Random, &plan, Mode::ThreeClass, 9).unwrap();
        for f in &out.folds {
            let mut start = 0;
            for (i, id) in f.experiment_ids.iter().enumerate() {
                let n = d.get(*id).unwrap().observations.len();
                assert_eq!(f.experiment_predictions[i], experiment_vote(&f.observation_predictions[start..start + n]));
                start += n;
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ClassifierSpec::Forest(ForestParams::new(10, 16)).validate().is_err());
        assert!(ClassifierSpec::Forest(ForestParams::new(0, 3)).validate().is_err());
        assert!(ClassifierSpec::Samme(SammeParams::new(0)).validate().is_err());
        for k in ClassifierKind::ALL {
            ClassifierSpec::default_for(k).validate().unwrap();
        }
    }

    #[test]
    fn fitted_model_json_roundtrip() {
        let d = toy_dataset();
        let ids: Vec<u32> = d.experiments.iter().map(|e| e.id).collect();
        let stats = compute_stats(d.experiments.iter().flat_map(|e| &e.observations)).unwrap();
        let (s, _) = fold_samples(&d, &ids, &stats, Mode::ThreeClass);
        let mut rng = rng_from_seed(4);
        for k in ClassifierKind::ALL {
            let mut spec = ClassifierSpec::default_for(k);
            if let ClassifierSpec::Forest(p) = &mut spec {
                p.n_trees = 3;
            }
            if let ClassifierSpec::Samme(p) = &mut spec {
                p.rounds = 3;
            }
            let m = spec.fit(&s, &mut rng).unwrap();
            assert_eq!(FittedModel::from_json(&m.to_json()).unwrap(), m);
        }
    }

    #[test]
    fn overrides_apply_to_their_kind_only() {
        let o = SpecOverrides { n_trees: Some(7), ..SpecOverrides::default() };
        assert_eq!(
            ClassifierSpec::with_overrides(ClassifierKind::Forest, &o).unwrap(),
            ClassifierSpec::Forest(ForestParams::new(7, 4))
        );
        assert!(matches!(ClassifierSpec::with_overrides(ClassifierKind::Logreg, &o), Err(EvalError::Spec(m)) if m.contains("n_trees")));
        let l = SpecOverrides { penalty: Some(PenaltyKind::L1), lambda: Some(0.5), ..SpecOverrides::default() };
        match ClassifierSpec::with_overrides(ClassifierKind::Logreg, &l).unwrap() {
            ClassifierSpec::Logreg { penalty, .. } => assert_eq!(penalty, Penalty::l1(0.5).unwrap()),
            other => panic!("{other:?}"),
        }
        let bad = SpecOverrides { m_try: Some(99), ..SpecOverrides::default() };
        assert!(ClassifierSpec::with_overrides(ClassifierKind::Forest, &bad).is_err());
        let d = SpecOverrides { depth: Some(1), rounds: Some(3), ..SpecOverrides::default() };
        match ClassifierSpec::with_overrides(ClassifierKind::Samme, &d).unwrap() {
            ClassifierSpec::Samme(p) => assert_eq!((p.rounds, p.weak.max_depth), (3, Some(1))),
            other => panic!("{other:?}"),
        }
    }
}
