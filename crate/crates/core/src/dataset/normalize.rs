//! Z-score normalisation fitted on training observations.

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::sensor::{numeric_indices, Observation, N_SENSORS, SENSOR_SPECS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableStats {
    pub name: String,
    /// Index into the canonical sensor order.
    pub index: usize,
    pub mean: f64,
    pub std: f64,
    /// Set when the variable was constant on the training data.
    pub constant: bool,
}

/// Per-variable mean and sample SD of the numeric sensors. Booleans are not
/// covered; they enter feature vectors as raw 0/1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub variables: Vec<VariableStats>,
}

impl NormalizationStats {
    pub fn has_constant(&self) -> bool {
        self.variables.iter().any(|v| v.constant)
    }

    pub fn get(&self, name: &str) -> Option<&VariableStats> {
        self.variables.iter().find(|v| v.name == name)
    }
}

/// Sample mean and SD (n − 1 denominator) of every numeric variable.
pub fn compute_stats<'a, I>(observations: I) -> Result<NormalizationStats, DatasetError>
where
    I: IntoIterator<Item = &'a Observation>,
{
    let idx: Vec<usize> = numeric_indices().collect();
    let mut n = 0usize;
    let mut mean = vec![0.0; idx.len()];
    let mut m2 = vec![0.0; idx.len()];
    // Welford; results do not depend on the summation order beyond rounding.
    for obs in observations {
        n += 1;
        let v = obs.values();
        for (k, &i) in idx.iter().enumerate() {
            let delta = v[i] - mean[k];
            mean[k] += delta / n as f64;
            m2[k] += delta * (v[i] - mean[k]);
        }
    }
    if n < 2 {
        return Err(DatasetError::TooFewObservations(n));
    }
    let variables = idx
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let var = (m2[k] / (n - 1) as f64).max(0.0);
            let std = var.sqrt();
            // Welford leaves tiny residue on exactly constant columns.
            let constant = std <= 1e-12 * mean[k].abs().max(1.0);
            VariableStats {
                name: SENSOR_SPECS[i].name.to_string(),
                index: i,
                mean: mean[k],
                std: if constant { 0.0 } else { std },
                constant,
            }
        })
        .collect();
    Ok(NormalizationStats { variables })
}

/// Feature vector in canonical order: numeric variables z-scored (0 when the
/// training SD was 0), booleans as 0/1.
pub fn normalize(obs: &Observation, stats: &NormalizationStats) -> [f64; N_SENSORS] {
    let mut v = obs.values();
    for s in &stats.variables {
        v[s.index] = if s.std > 0.0 { (v[s.index] - s.mean) / s.std } else { 0.0 };
    }
    v
}

/// Inverse of [`normalize`] for non-constant variables; constant ones map back
/// to their training mean.
pub fn denormalize(features: &[f64; N_SENSORS], stats: &NormalizationStats) -> [f64; N_SENSORS] {
    let mut v = *features;
    for s in &stats.variables {
        v[s.index] = s.mean + v[s.index] * s.std;
    }
    v
}
