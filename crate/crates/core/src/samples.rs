//! Dense feature matrix shared by the learners.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplesError {
    #[error("no samples")]
    Empty,
    #[error("row {row} has {found} features, expected {expected}")]
    Dimension { row: usize, found: usize, expected: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    Label { label: usize, n_classes: usize },
}

/// Dense row-major feature matrix with class labels `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub(crate) n_features: usize,
    pub(crate) n_classes: usize,
    pub(crate) values: Vec<f64>,
    pub(crate) labels: Vec<usize>,
}

impl Samples {
    pub fn new(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<Self, SamplesError> {
        let n_features = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n_features {
                return Err(SamplesError::Dimension { row, found: r.len(), expected: n_features });
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(values, n_features, labels.to_vec(), n_classes)
    }

    pub fn from_flat(values: Vec<f64>, n_features: usize, labels: Vec<usize>, n_classes: usize) -> Result<Self, SamplesError> {
        if labels.is_empty() {
            return Err(SamplesError::Empty);
        }
        if values.len() != labels.len() * n_features {
            return Err(SamplesError::Dimension { row: 0, found: values.len(), expected: labels.len() * n_features });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(SamplesError::Label { label, n_classes });
        }
        Ok(Samples { n_features, n_classes, values, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, f: usize) -> f64 {
        self.values[i * self.n_features + f]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

