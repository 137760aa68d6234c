use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crossval::{prepare_folds, score_fold, ClassifierKind, ClassifierSpec, FoldResult, Mode, PreparedFold};
use super::{t_confidence_interval, EvalError, Interval};
use crate::dataset::{Dataset, FoldPlan};
use crate::linear::{fit_logreg, Penalty, PenaltyKind};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sensor::N_SENSORS;
use crate::tree::argmax;
use crate::tree::fit_forest;
use crate::tree::fit_samme;
use crate::tree::Classifier;

/// Hyperparameter grid: one curve per series value, error against `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepGrid {
    /// Series: number of trees; x: candidate features per split.
    Forest { n_trees: Vec<usize>, m_try: Vec<usize> },
    /// Series: weak-tree depth; x: boosting rounds.
    Samme { depth: Vec<usize>, rounds: Vec<usize> },
    /// Series: penalty kind; x: penalty strength.
    Logreg { penalty: Vec<PenaltyKind>, lambda: Vec<f64> },
}

fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>, EvalError> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(EvalError::Grid(format!("`{key}` has no values")));
    }
    items
        .iter()
        .map(|s| s.parse().map_err(|_| EvalError::Grid(format!("`{key}` value `{s}` does not parse"))))
        .collect()
}

impl SweepGrid {
    pub fn default_for(kind: ClassifierKind) -> Result<Self, EvalError> {
        match kind {
            ClassifierKind::Forest => {
                Ok(SweepGrid::Forest { n_trees: vec![1, 5, 10, 25, 50, 100, 150], m_try: (1..=N_SENSORS).collect() })
            }
            ClassifierKind::Samme => Ok(SweepGrid::Samme { depth: vec![1, 2, 3], rounds: vec![1, 5, 10, 25, 50, 100, 150] }),
            ClassifierKind::Logreg => Ok(SweepGrid::Logreg {
                penalty: vec![PenaltyKind::L1, PenaltyKind::L2],
                lambda: (-4..=2).map(|e| 10f64.powi(e)).collect(),
            }),
            k => Err(EvalError::Grid(format!("{k} has no hyperparameters to sweep"))),
        }
    }

    /// Parses `key=v1,v2;key=v1,...`. Keys left out keep their defaults.
    /// Forest keys: `n_trees`, `m_try`; SAMME: `depth`, `rounds`;
    /// logreg: `penalty`, `lambda`.
    pub fn parse(kind: ClassifierKind, text: &str) -> Result<Self, EvalError> {
        if text.trim().is_empty() {
            return Err(EvalError::Grid("empty grid".into()));
        }
        let mut grid = Self::default_for(kind)?;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) =
                part.split_once('=').ok_or_else(|| EvalError::Grid(format!("expected `key=values`, got `{part}`")))?;
            let key = key.trim();
            match (&mut grid, key) {
                (SweepGrid::Forest { n_trees, .. }, "n_trees") => *n_trees = parse_list(key, values)?,
                (SweepGrid::Forest { m_try, .. }, "m_try") => *m_try = parse_list(key, values)?,
                (SweepGrid::Samme { depth, .. }, "depth") => *depth = parse_list(key, values)?,
                (SweepGrid::Samme { rounds, .. }, "rounds") => *rounds = parse_list(key, values)?,
                (SweepGrid::Logreg { penalty, .. }, "penalty") => *penalty = parse_list(key, values)?,
                (SweepGrid::Logreg { lambda, .. }, "lambda") => *lambda = parse_list(key, values)?,
                _ => return Err(EvalError::Grid(format!("unknown key `{key}` for {kind}"))),
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            SweepGrid::Forest { .. } => ClassifierKind::Forest,
            SweepGrid::Samme { .. } => ClassifierKind::Samme,
            SweepGrid::Logreg { .. } => ClassifierKind::Logreg,
        }
    }

    /// Names of the series and x hyperparameters.
    pub fn axes(&self) -> (&'static str, &'static str) {
        match self {
            SweepGrid::Forest { .. } => ("n_trees", "m_try"),
            SweepGrid::Samme { .. } => ("depth", "rounds"),
            SweepGrid::Logreg { .. } => ("penalty", "lambda"),
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::Grid(m));
        let (empty, ok) = match self {
            SweepGrid::Forest { n_trees, m_try } => (
                n_trees.is_empty() || m_try.is_empty(),
                n_trees.iter().all(|&n| n >= 1) && m_try.iter().all(|&m| (1..=N_SENSORS).contains(&m)),
            ),
            SweepGrid::Samme { depth, rounds } => {
                (depth.is_empty() || rounds.is_empty(), depth.iter().all(|&d| d >= 1) && rounds.iter().all(|&r| r >= 1))
            }
            SweepGrid::Logreg { penalty, lambda } => {
                (penalty.is_empty() || lambda.is_empty(), lambda.iter().all(|&l| l > 0.0 && l.is_finite()))
            }
        };
        if empty {
            return bad("empty grid".into());
        }
        if !ok {
            return bad("grid value out of range".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub series: String,
    pub x: f64,
    pub observation_error: Interval,
    pub experiment_error: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub kind: ClassifierKind,
    pub mode: Mode,
    pub series_name: String,
    pub x_name: String,
    /// Ordered by series, then by `x` in grid order.
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},obs_error,obs_error_hw,exp_error,exp_error_hw\n", self.series_name, self.x_name);
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.series,
                r.x,
                r.observation_error.mean,
                r.observation_error.half_width,
                r.experiment_error.mean,
                r.experiment_error.half_width
            ));
        }
        out
    }

    /// Distinct series values in table order.
    pub fn series(&self) -> Vec<&str> {
        let mut s: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !s.contains(&r.series.as_str()) {
                s.push(&r.series);
            }
        }
        s
    }
}

fn row(series: String, x: f64, folds: &[FoldResult]) -> SweepRow {
    let obs: Vec<f64> = folds.iter().map(|f| f.observation_error).collect();
    let exp: Vec<f64> = folds.iter().map(|f| f.experiment_error).collect();
    SweepRow { series, x, observation_error: t_confidence_interval(&obs, 0.95), experiment_error: t_confidence_interval(&exp, 0.95) }
}

/// Per-model predictions of every validation row, one vector per prefix
/// length requested.
type PrefixPredictions = Vec<Vec<usize>>;

fn fold_error(fold: usize, message: String) -> EvalError {
    EvalError::Fold { fold, message }
}

/// Cross-validates every grid point over `plan`.
///
/// Fold `i` uses the stream `derive_seed(seed, i)` at every grid point, as
/// [`super::cross_validate`] does, so each row equals the corresponding
/// single cross-validation run. Forests of different sizes share their
/// leading trees and boosted ensembles their leading rounds, so one fit per
/// fold serves a whole series.
pub fn sweep(
    dataset: &Dataset,
    template: &ClassifierSpec,
    grid: &SweepGrid,
    plan: &FoldPlan,
    mode: Mode,
    seed: u64,
) -> Result<SweepTable, EvalError> {
    grid.validate()?;
    if template.kind() != grid.kind() {
        return Err(EvalError::Grid(format!("grid for {} used with a {} template", grid.kind(), template.kind())));
    }
    template.validate()?;
    if plan.folds.len() < 2 {
        return Err(EvalError::Spec(format!("need at least 2 folds, got {}", plan.folds.len())));
    }
    let prepared = prepare_folds(dataset, plan, mode)?;
    let fold_rng = |p: &PreparedFold| rng_from_seed(derive_seed(seed, p.index as u64));
    let at = |point: String, e: EvalError| EvalError::GridPoint { point, source: Box::new(e) };
    let (series_name, x_name) = grid.axes();
    let mut rows = Vec::new();

    match (grid, template) {
        (SweepGrid::Forest { n_trees, m_try }, ClassifierSpec::Forest(base)) => {
            let max_trees = *n_trees.iter().max().expect("non-empty");
            // cells[m][fold][n] = predictions of the first n_trees[n] trees.
            let mut cells: Vec<Vec<PrefixPredictions>> = Vec::new();
            for &m in m_try {
                let per_fold = prepared
                    .par_iter()
                    .map(|p| {
                        let params = crate::tree::ForestParams { n_trees: max_trees, m_try: m, ..*base };
                        let forest = fit_forest(&p.train, &params, &mut fold_rng(p))
                            .map_err(|e| fold_error(p.index, e.to_string()))?;
                        let k = p.train.n_classes();
                        let tree_preds: Vec<Vec<usize>> =
                            forest.trees.iter().map(|t| t.predict_many(&p.validation)).collect();
                        Ok(n_trees
                            .iter()
                            .map(|&n| {
                                (0..p.validation.len())
                                    .map(|i| {
                                        let mut votes = vec![0.0; k];
                                        for preds in &tree_preds[..n] {
                                            votes[preds[i]] += 1.0;
                                        }
                                        argmax(&votes)
                                    })
                                    .collect()
                            })
                            .collect())
                    })
                    .collect::<Result<Vec<PrefixPredictions>, EvalError>>()
                    .map_err(|e| at(format!("{x_name}={m}"), e))?;
                cells.push(per_fold);
            }
            for (ni, &n) in n_trees.iter().enumerate() {
                for (mi, &m) in m_try.iter().enumerate() {
                    let folds: Vec<FoldResult> =
                        prepared.iter().zip(&cells[mi]).map(|(p, preds)| score_fold(p, &preds[ni], mode)).collect();
                    rows.push(row(n.to_string(), m as f64, &folds));
                }
            }
        }
        (SweepGrid::Samme { depth, rounds }, ClassifierSpec::Samme(base)) => {
            let max_rounds = *rounds.iter().max().expect("non-empty");
            for &d in depth {
                let per_fold = prepared
                    .par_iter()
                    .map(|p| {
                        let mut params = *base;
                        params.rounds = max_rounds;
                        params.weak.max_depth = Some(d);
                        let e = fit_samme(&p.train, &params, &mut fold_rng(p))
                            .map_err(|e| fold_error(p.index, e.to_string()))?;
                        let k = p.train.n_classes();
                        let round_preds: Vec<Vec<usize>> =
                            e.rounds.iter().map(|(t, _)| t.predict_many(&p.validation)).collect();
                        Ok(rounds
                            .iter()
                            .map(|&r| {
                                let used = r.min(e.rounds.len());
                                (0..p.validation.len())
                                    .map(|i| {
                                        if used == 0 {
                                            return e.fallback_class;
                                        }
                                        let mut scores = vec![0.0; k];
                                        for (preds, (_, alpha)) in round_preds[..used].iter().zip(&e.rounds) {
                                            scores[preds[i]] += alpha;
                                        }
                                        argmax(&scores)
                                    })
                                    .collect()
                            })
                            .collect())
                    })
                    .collect::<Result<Vec<PrefixPredictions>, EvalError>>()
                    .map_err(|e| at(format!("{series_name}={d}"), e))?;
                for (ri, &r) in rounds.iter().enumerate() {
                    let folds: Vec<FoldResult> =
                        prepared.iter().zip(&per_fold).map(|(p, preds)| score_fold(p, &preds[ri], mode)).collect();
                    rows.push(row(d.to_string(), r as f64, &folds));
                }
            }
        }
        (SweepGrid::Logreg { penalty, lambda }, ClassifierSpec::Logreg { fit, .. }) => {
            for &kind in penalty {
                for &l in lambda {
                    let point = format!("{series_name}={},{x_name}={l}", kind.name());
                    let pen = Penalty::new(kind, l).map_err(|e| at(point.clone(), EvalError::Spec(e.to_string())))?;
                    let folds = prepared
                        .par_iter()
                        .map(|p| {
                            let m = fit_logreg(&p.train, &pen, fit).map_err(|e| fold_error(p.index, e.to_string()))?;
                            Ok(score_fold(p, &m.predict_many(&p.validation), mode))
                        })
                        .collect::<Result<Vec<FoldResult>, EvalError>>()
                        .map_err(|e| at(point.clone(), e))?;
                    rows.push(row(kind.name().to_string(), l, &folds));
                }
            }
        }
        _ => unreachable!("kinds checked above"),
    }

    Ok(SweepTable { kind: grid.kind(), mode, series_name: series_name.into(), x_name: x_name.into(), rows })
}
