use serde::{Deserialize, Serialize};

use super::crossval::{FoldResult, Mode};
use super::EvalError;
use crate::sensor::{sensor_names, N_SENSORS};

/// Variable importances averaged over folds.
///
/// Tree models fill `importance` with the mean normalised split importance.
/// Logistic models fill `per_class` with the mean absolute coefficient of
/// every class and variable, `mean_coefficients` with the signed means, and
/// `importance` with the per-variable mean of `per_class`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub variables: Vec<String>,
    pub importance: Vec<f64>,
    pub class_names: Vec<String>,
    pub per_class: Vec<Vec<f64>>,
    pub mean_coefficients: Vec<Vec<f64>>,
}

pub fn aggregate_importance(folds: &[FoldResult], mode: Mode) -> Result<ImportanceReport, EvalError> {
    if folds.is_empty() {
        return Err(EvalError::Spec("no folds to aggregate".into()));
    }
    let variables: Vec<String> = sensor_names().iter().map(|s| s.to_string()).collect();
    let n = folds.len() as f64;
    if let Some(vectors) = folds.iter().map(|f| f.importance.as_ref()).collect::<Option<Vec<_>>>() {
        let mut importance = vec![0.0; N_SENSORS];
        for v in vectors {
            for (acc, x) in importance.iter_mut().zip(v) {
                *acc += x / n;
            }
        }
        return Ok(ImportanceReport {
            variables,
            importance,
            class_names: Vec::new(),
            per_class: Vec::new(),
            mean_coefficients: Vec::new(),
        });
    }
    let tables = folds
        .iter()
        .map(|f| f.coefficients.as_ref())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| EvalError::Spec("folds carry neither importances nor coefficients".into()))?;
    let k = mode.n_classes();
    let mut per_class = vec![vec![0.0; N_SENSORS]; k];
    let mut mean_coefficients = vec![vec![0.0; N_SENSORS]; k];
    for table in tables {
        for (c, row) in table.iter().enumerate() {
            for j in 0..N_SENSORS {
                per_class[c][j] += row[j].abs() / n;
                mean_coefficients[c][j] += row[j] / n;
            }
        }
    }
    let importance = (0..N_SENSORS).map(|j| per_class.iter().map(|r| r[j]).sum::<f64>() / k as f64).collect();
    Ok(ImportanceReport { variables, importance, class_names: mode.class_names(), per_class, mean_coefficients })
}

impl ImportanceReport {
    pub fn is_coefficients(&self) -> bool {
        !self.per_class.is_empty()
    }

    /// `variable,importance` rows in canonical sensor order; coefficient
    /// reports add one mean-magnitude column per class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable,importance");
        for c in &self.class_names {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (j, name) in self.variables.iter().enumerate() {
            out.push_str(&format!("{name},{}", self.importance[j]));
            for row in &self.per_class {
                out.push_str(&format!(",{}", row[j]));
            }
            out.push('\n');
        }
        out
    }
}
