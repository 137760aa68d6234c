//! Social-scenario classification from a small robot's low-resolution sensors.
//!
//! The crate is organised bottom-up:
//!
//! * [`sensor`] – the 15-variable sensor vocabulary and [`sensor::Observation`].
//! * [`sim`] – a seeded simulator for the three interaction scenarios.
//! * [`dataset`] – CSV persistence, z-score normalisation and fold plans.
//! * [`tree`] – Gini CART trees, random forests and SAMME boosting.
//! * [`linear`] – one-vs-rest L1/L2 logistic regression.
//! * [`eval`] – cross-validation, null models, metrics, sweeps and importances.

pub mod dataset;
pub mod eval;
pub mod linear;
pub mod rng;
pub mod samples;
pub mod sensor;
pub mod sim;
pub mod tree;

pub use dataset::{Dataset, Experiment, FoldPlan, NormalizationStats};
pub use sensor::{Observation, ProximityBand, ScenarioLabel};
