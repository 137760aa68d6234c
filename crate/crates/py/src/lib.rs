//! Python bindings: simulation, datasets, fold plans, cross-validation,
//! sweeps, importances and single-model fitting.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sensorscene_core::dataset::{load_dataset, make_folds as core_make_folds, save_dataset, DatasetError};
use sensorscene_core::eval::{self, ClassifierKind, ClassifierSpec, EvalError, FittedModel, Mode, SpecOverrides, SweepGrid};
use sensorscene_core::linear::PenaltyKind;
use sensorscene_core::rng::rng_from_seed;
use sensorscene_core::samples::Samples;
use sensorscene_core::sensor::sensor_names;
use sensorscene_core::sim::{self, SimError};

fn eval_err(e: EvalError) -> PyErr {
    match e {
        EvalError::Dataset(d) => dataset_err(d),
        EvalError::Fold { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn dataset_err(e: DatasetError) -> PyErr {
    match e {
        DatasetError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sim_err(e: SimError) -> PyErr {
    match e {
        SimError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_kind(classifier: &str) -> PyResult<ClassifierKind> {
    classifier.parse().map_err(eval_err)
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(eval_err)
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    kind: ClassifierKind,
    n_trees: Option<usize>,
    m_try: Option<usize>,
    rounds: Option<usize>,
    depth: Option<usize>,
    penalty: Option<&str>,
    lam: Option<f64>,
) -> PyResult<ClassifierSpec> {
    let penalty = penalty
        .map(|p| p.parse::<PenaltyKind>().map_err(|e| PyValueError::new_err(e.to_string())))
        .transpose()?;
    let overrides = SpecOverrides { n_trees, m_try, rounds, depth, penalty, lambda: lam };
    ClassifierSpec::with_overrides(kind, &overrides).map_err(eval_err)
}

/// Simulator parameters.
#[pyclass(module = "sensorscene", from_py_object)]
#[derive(Clone)]
struct SimConfig {
    inner: sim::SimConfig,
}

#[pymethods]
impl SimConfig {
    #[new]
    fn new() -> Self {
        SimConfig { inner: sim::SimConfig::default() }
    }

    /// Parses `key = value` lines; keys left out keep their defaults.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = sim::SimConfig::from_kv_str(text).map_err(sim_err)?;
        inner.validate().map_err(sim_err)?;
        Ok(SimConfig { inner })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let inner = sim::SimConfig::from_file(&path).map_err(sim_err)?;
        inner.validate().map_err(sim_err)?;
        Ok(SimConfig { inner })
    }

    fn to_text(&self) -> String {
        self.inner.to_kv_string()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }
}

/// A simulated or loaded campaign.
#[pyclass(module = "sensorscene", skip_from_py_object)]
#[derive(Clone)]
struct Dataset {
    inner: sensorscene_core::Dataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Dataset { inner: load_dataset(&path).map_err(dataset_err)? })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Dataset { inner: sensorscene_core::Dataset::from_csv_str(text).map_err(dataset_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_dataset(&self.inner, &path).map_err(dataset_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    #[getter]
    fn n_experiments(&self) -> usize {
        self.inner.experiments.len()
    }

    #[getter]
    fn n_observations(&self) -> usize {
        self.inner.n_observations()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.provenance.seed
    }

    #[getter]
    fn config_digest(&self) -> String {
        self.inner.provenance.config_digest.clone()
    }

    #[getter]
    fn experiment_ids(&self) -> Vec<u32> {
        self.inner.experiments.iter().map(|e| e.id).collect()
    }

    /// `(scenario, proximity, door_start, door_end)` of one experiment.
    fn labels(&self, id: u32) -> PyResult<(usize, usize, usize, usize)> {
        let e = self.experiment(id)?;
        Ok((e.scenario.index(), e.proximity.index(), e.door_start as usize, e.door_end as usize))
    }

    /// Sensor rows of one experiment in canonical order, booleans as 0/1.
    fn observations(&self, id: u32) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.experiment(id)?.observations.iter().map(|o| o.values().to_vec()).collect())
    }

    fn times(&self, id: u32) -> PyResult<Vec<f64>> {
        Ok(self.experiment(id)?.observations.iter().map(|o| o.t).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.experiments.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(experiments={}, observations={}, seed={})",
            self.inner.experiments.len(),
            self.inner.n_observations(),
            self.inner.provenance.seed
        )
    }
}

impl Dataset {
    fn experiment(&self, id: u32) -> PyResult<&sensorscene_core::Experiment> {
        self.inner.get(id).ok_or_else(|| PyValueError::new_err(format!("no experiment with id {id}")))
    }
}

/// Condition-stratified fold assignment.
#[pyclass(module = "sensorscene", skip_from_py_object)]
#[derive(Clone)]
struct FoldPlan {
    inner: sensorscene_core::FoldPlan,
}

#[pymethods]
impl FoldPlan {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    /// Validation ids of every fold.
    #[getter]
    fn validation(&self) -> Vec<Vec<u32>> {
        self.inner.folds.iter().map(|f| f.validation.clone()).collect()
    }

    fn to_table(&self) -> String {
        self.inner.to_table()
    }
}

/// Cross-validated metrics of one classifier.
#[pyclass(module = "sensorscene")]
struct CvReport {
    outcome: eval::CvOutcome,
}

#[pymethods]
impl CvReport {
    /// `(mean, half_width)` of the observation-level error.
    #[getter]
    fn observation_error(&self) -> (f64, f64) {
        let i = self.outcome.report.observation_error;
        (i.mean, i.half_width)
    }

    #[getter]
    fn experiment_error(&self) -> (f64, f64) {
        let i = self.outcome.report.experiment_error;
        (i.mean, i.half_width)
    }

    #[getter]
    fn fold_observation_errors(&self) -> Vec<f64> {
        self.outcome.folds.iter().map(|f| f.observation_error).collect()
    }

    #[getter]
    fn fold_experiment_errors(&self) -> Vec<f64> {
        self.outcome.folds.iter().map(|f| f.experiment_error).collect()
    }

    /// Accuracy, F1 and MCC summaries in 2-class mode, `None` otherwise.
    fn binary<'py>(&self, py: Python<'py>, level: &str) -> PyResult<Option<Bound<'py, PyDict>>> {
        let summary = match level {
            "observation" => self.outcome.report.observation_binary,
            "experiment" => self.outcome.report.experiment_binary,
            other => return Err(PyValueError::new_err(format!("level must be observation or experiment, got {other}"))),
        };
        let Some(s) = summary else { return Ok(None) };
        let d = PyDict::new(py);
        d.set_item("accuracy", (s.accuracy.mean, s.accuracy.half_width))?;
        d.set_item("f1", (s.f1.mean, s.f1.half_width))?;
        d.set_item("mcc", s.mcc.map(|m| (m.mean, m.half_width)))?;
        d.set_item("mcc_defined_folds", s.mcc_defined_folds)?;
        Ok(Some(d))
    }

    #[getter]
    fn warnings(&self) -> usize {
        self.outcome.report.warnings
    }

    fn table_row(&self) -> String {
        self.outcome.report.table_row()
    }

    fn to_csv(&self) -> String {
        self.outcome.report.to_csv()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.outcome).expect("outcome serialises")
    }

    fn __repr__(&self) -> String {
        format!("CvReport({})", self.outcome.report.table_row())
    }
}

/// A classifier fitted on raw feature rows.
#[pyclass(module = "sensorscene")]
struct Model {
    inner: FittedModel,
    seed: u64,
}

#[pymethods]
impl Model {
    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        let n_features = rows.first().map_or(0, Vec::len);
        let labels = vec![0; rows.len()];
        let samples = Samples::new(&rows, &labels, 1).map_err(|e| PyValueError::new_err(e.to_string()))?;
        if let Some(expected) = self.n_features() {
            if n_features != expected && !rows.is_empty() {
                return Err(PyValueError::new_err(format!("expected {expected} features, got {n_features}")));
            }
        }
        Ok(self.inner.predict_all(&samples, &mut rng_from_seed(self.seed)))
    }

    /// Normalised split importances of tree models.
    fn importance(&self) -> Option<Vec<f64>> {
        self.inner.importance()
    }

    /// Per-class coefficient rows (weights, then intercept) of logistic models.
    fn coefficients(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.coefficients()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

impl Model {
    fn n_features(&self) -> Option<usize> {
        match &self.inner {
            FittedModel::Forest(f) => f.trees.first().map(|t| t.n_features),
            FittedModel::Samme(b) => b.rounds.first().map(|(t, _)| t.n_features),
            FittedModel::Logreg(m) => Some(m.n_features()),
            FittedModel::Trivial { .. } | FittedModel::Random { .. } => None,
        }
    }
}

/// Simulates the 150-experiment campaign.
#[pyfunction]
#[pyo3(signature = (seed, config=None))]
fn simulate(py: Python<'_>, seed: u64, config: Option<SimConfig>) -> PyResult<Dataset> {
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let inner = py.detach(|| sim::simulate_campaign(seed, &cfg)).map_err(sim_err)?;
    Ok(Dataset { inner })
}

#[pyfunction]
#[pyo3(signature = (dataset, k, seed))]
fn make_folds(dataset: &Dataset, k: usize, seed: u64) -> PyResult<FoldPlan> {
    let inner = core_make_folds(&dataset.inner, k, &mut rng_from_seed(seed)).map_err(dataset_err)?;
    Ok(FoldPlan { inner })
}

/// Cross-validates one classifier; the fold plan is drawn from `seed`
/// unless `plan` is given.
#[pyfunction]
#[pyo3(signature = (
    dataset, classifier, mode="3class", *, seed, folds=10, plan=None,
    n_trees=None, m_try=None, rounds=None, depth=None, penalty=None, lam=None
))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    py: Python<'_>,
    dataset: &Dataset,
    classifier: &str,
    mode: &str,
    seed: u64,
    folds: usize,
    plan: Option<&FoldPlan>,
    n_trees: Option<usize>,
    m_try: Option<usize>,
    rounds: Option<usize>,
    depth: Option<usize>,
    penalty: Option<&str>,
    lam: Option<f64>,
) -> PyResult<CvReport> {
    let kind = parse_kind(classifier)?;
    let mode = parse_mode(mode)?;
    let spec = build_spec(kind, n_trees, m_try, rounds, depth, penalty, lam)?;
    let plan = match plan {
        Some(p) => p.inner.clone(),
        None => make_folds(dataset, folds, seed)?.inner,
    };
    let data = &dataset.inner;
    let outcome = py.detach(|| eval::cross_validate(data, &spec, &plan, mode, seed)).map_err(eval_err)?;
    Ok(CvReport { outcome })
}

/// Cross-validates a hyperparameter grid and returns the table as CSV.
/// `grid` uses `key=v1,v2;key=...`; `None` selects the default grid.
#[pyfunction]
#[pyo3(signature = (dataset, classifier, grid=None, mode="3class", *, seed, folds=10))]
fn sweep(
    py: Python<'_>,
    dataset: &Dataset,
    classifier: &str,
    grid: Option<&str>,
    mode: &str,
    seed: u64,
    folds: usize,
) -> PyResult<String> {
    let kind = parse_kind(classifier)?;
    let mode = parse_mode(mode)?;
    let grid = match grid {
        Some(g) => SweepGrid::parse(kind, g),
        None => SweepGrid::default_for(kind),
    }
    .map_err(eval_err)?;
    let template = ClassifierSpec::default_for(kind);
    let plan = make_folds(dataset, folds, seed)?.inner;
    let data = &dataset.inner;
    let table = py.detach(|| eval::sweep(data, &template, &grid, &plan, mode, seed)).map_err(eval_err)?;
    Ok(table.to_csv())
}

/// Fold-averaged importance of every sensor variable.
#[pyfunction]
#[pyo3(signature = (dataset, classifier, mode="3class", *, seed, folds=10))]
fn importance<'py>(
    py: Python<'py>,
    dataset: &Dataset,
    classifier: &str,
    mode: &str,
    seed: u64,
    folds: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = parse_kind(classifier)?;
    if kind.is_null() {
        return Err(eval_err(EvalError::NoImportance(kind)));
    }
    let report = cross_validate(py, dataset, classifier, mode, seed, folds, None, None, None, None, None, None, None)?;
    let mode = parse_mode(mode)?;
    let agg = eval::aggregate_importance(&report.outcome.folds, mode).map_err(eval_err)?;
    let d = PyDict::new(py);
    for (name, v) in agg.variables.iter().zip(&agg.importance) {
        d.set_item(name, v)?;
    }
    Ok(d)
}

/// Fits one classifier on raw rows with labels in `0..n_classes`.
#[pyfunction]
#[pyo3(signature = (
    classifier, rows, labels, n_classes, *, seed,
    n_trees=None, m_try=None, rounds=None, depth=None, penalty=None, lam=None
))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    classifier: &str,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
    seed: u64,
    n_trees: Option<usize>,
    m_try: Option<usize>,
    rounds: Option<usize>,
    depth: Option<usize>,
    penalty: Option<&str>,
    lam: Option<f64>,
) -> PyResult<Model> {
    let kind = parse_kind(classifier)?;
    let samples = Samples::new(&rows, &labels, n_classes).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let mut spec = build_spec(kind, n_trees, m_try, rounds, depth, penalty, lam)?;
    if let ClassifierSpec::Forest(p) = &mut spec {
        if m_try.is_none() {
            p.m_try = p.m_try.min(samples.n_features()).max(1);
        }
    }
    let inner = py
        .detach(|| spec.fit(&samples, &mut rng_from_seed(seed)))
        .map_err(PyValueError::new_err)?;
    Ok(Model { inner, seed })
}

#[pyfunction]
fn variable_names() -> Vec<&'static str> {
    sensor_names().to_vec()
}

#[pymodule]
fn sensorscene(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SimConfig>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<FoldPlan>()?;
    m.add_class::<CvReport>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(make_folds, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(importance, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(variable_names, m)?)?;
    Ok(())
}
