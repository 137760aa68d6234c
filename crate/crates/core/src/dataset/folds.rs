//! Condition-stratified k-fold plans.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// Sorted validation experiment ids.
    pub validation: Vec<u32>,
    /// Sorted training experiment ids (complement of `validation`).
    pub training: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Fold>,
}

/// Deals the experiments of every scenario × proximity condition, in random
/// order, round-robin over the folds. Conditions must be equally sized with
/// at least `k` experiments each; dealing continues where the previous
/// condition stopped, so fold sizes differ by at most one.
pub fn make_folds(dataset: &Dataset, k: usize, rng: &mut impl Rng) -> Result<FoldPlan, DatasetError> {
    if k < 2 {
        return Err(DatasetError::FoldCount(k));
    }
    let mut by_condition: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for e in &dataset.experiments {
        by_condition.entry(e.condition()).or_default().push(e.id);
    }
    let per_condition = by_condition.values().next().map_or(0, Vec::len);
    if per_condition < k {
        return Err(DatasetError::FoldCount(k));
    }
    let mut validation = vec![Vec::new(); k];
    let mut next = 0;
    for (cond, mut ids) in by_condition {
        if ids.len() != per_condition {
            return Err(DatasetError::UnevenConditions {
                scenario: cond / 5,
                proximity: cond % 5,
                count: ids.len(),
                expected: per_condition,
            });
        }
        ids.sort_unstable();
        ids.shuffle(rng);
        for id in ids {
            validation[next].push(id);
            next = (next + 1) % k;
        }
    }
    let mut all: Vec<u32> = dataset.experiments.iter().map(|e| e.id).collect();
    all.sort_unstable();
    let folds = validation
        .into_iter()
        .map(|mut v| {
            v.sort_unstable();
            let training = all.iter().copied().filter(|id| v.binary_search(id).is_err()).collect();
            Fold { validation: v, training }
        })
        .collect();
    Ok(FoldPlan { k, folds })
}

impl FoldPlan {
    /// Audit table: one `fold,experiment_id` row per validation membership.
    pub fn to_table(&self) -> String {
        let mut out = String::from("fold,experiment_id\n");
        for (i, f) in self.folds.iter().enumerate() {
            for id in &f.validation {
                let _ = writeln!(out, "{i},{id}");
            }
        }
        out
    }

    /// Rebuilds a plan from [`FoldPlan::to_table`] output and the full id list.
    pub fn from_table(text: &str, all_ids: &[u32]) -> Result<FoldPlan, DatasetError> {
        let mut validation: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parsed = line
                .split_once(',')
                .and_then(|(f, id)| Some((f.trim().parse().ok()?, id.trim().parse().ok()?)));
            let (fold, id): (usize, u32) = parsed.ok_or_else(|| DatasetError::Row {
                line: n as u64 + 1,
                message: format!("expected `fold,experiment_id`, got `{line}`"),
            })?;
            validation.entry(fold).or_default().push(id);
        }
        let k = validation.len();
        let mut all = all_ids.to_vec();
        all.sort_unstable();
        let folds = validation
            .into_values()
            .map(|mut v| {
                v.sort_unstable();
                let training = all.iter().copied().filter(|id| v.binary_search(id).is_err()).collect();
                Fold { validation: v, training }
            })
            .collect();
        Ok(FoldPlan { k, folds })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Experiment, Provenance};
    use crate::rng::rng_from_seed;
    use crate::sensor::{ProximityBand, ScenarioLabel};
    use std::collections::HashSet;

    fn grid(per_condition: usize) -> Dataset {
        let mut experiments = Vec::new();
        let mut id = 0;
        for s in ScenarioLabel::ALL {
            for p in ProximityBand::ALL {
                for _ in 0..per_condition {
                    experiments.push(Experiment {
                        id,
                        scenario: s,
                        proximity: p,
                        door_start: 0,
                        door_end: 1,
                        observations: vec![crate::dataset::tests::obs(0.0, 500)],
                    });
                    id += 1;
                }
            }
        }
        Dataset { experiments, provenance: Provenance { seed: 0, config_digest: String::new() } }
    }

    #[test]
    fn ten_folds_of_fifteen() {
        let d = grid(10);
        let plan = make_folds(&d, 10, &mut rng_from_seed(1)).unwrap();
        assert_eq!(plan.folds.len(), 10);
        let mut union = HashSet::new();
        for f in &plan.folds {
            assert_eq!(f.validation.len(), 15);
            assert_eq!(f.training.len(), 135);
            let conds: HashSet<usize> = f.validation.iter().map(|&id| d.get(id).unwrap().condition()).collect();
            assert_eq!(conds.len(), 15);
            for id in &f.validation {
                assert!(union.insert(*id), "id {id} validated twice");
                assert!(f.training.binary_search(id).is_err());
            }
        }
        assert_eq!(union.len(), 150);
    }

    #[test]
    fn uneven_conditions_rejected() {
        let mut d = grid(10);
        d.experiments.pop();
        assert!(matches!(make_folds(&d, 10, &mut rng_from_seed(1)), Err(DatasetError::UnevenConditions { .. })));
    }

    #[test]
    fn fewer_folds_than_experiments_per_condition() {
        let d = grid(10);
        for k in [2, 3, 4, 5, 7] {
            let plan = make_folds(&d, k, &mut rng_from_seed(3)).unwrap();
            let sizes: Vec<usize> = plan.folds.iter().map(|f| f.validation.len()).collect();
            assert_eq!(sizes.iter().sum::<usize>(), 150);
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{k}: {sizes:?}");
            for f in &plan.folds {
                let mut per = BTreeMap::new();
                for id in &f.validation {
                    *per.entry(d.get(*id).unwrap().condition()).or_insert(0usize) += 1;
                }
                assert_eq!(per.len(), 15);
                assert!(per.values().all(|&c| c == 10 / k || c == 10 / k + 1));
            }
        }
        assert!(matches!(make_folds(&d, 11, &mut rng_from_seed(3)), Err(DatasetError::FoldCount(11))));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let d = grid(10);
        let a = make_folds(&d, 10, &mut rng_from_seed(5)).unwrap();
        let b = make_folds(&d, 10, &mut rng_from_seed(5)).unwrap();
        let c = make_folds(&d, 10, &mut rng_from_seed(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn table_round_trip() {
        let d = grid(4);
        let plan = make_folds(&d, 4, &mut rng_from_seed(2)).unwrap();
        let ids: Vec<u32> = d.experiments.iter().map(|e| e.id).collect();
        assert_eq!(FoldPlan::from_table(&plan.to_table(), &ids).unwrap(), plan);
    }
}
