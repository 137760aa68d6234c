//! Seeded simulator for the three interaction scenarios.
//!
//! The robot sits at the centre of a rectangular room and pivots 30° every
//! 20 s. A walker enters through one of three doors and either crosses the
//! room past the robot or circles it before leaving through another door. All
//! randomness is drawn from generators seeded by the caller.

pub mod config;
pub mod geometry;
pub mod path;
pub mod sense;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

pub use config::SimConfig;
pub use geometry::Point;
pub use path::{build_walker_path, WalkerPath, Waypoint};
pub use sense::sense;

use crate::dataset::{Dataset, Experiment, Provenance};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sensor::{ProximityBand, ScenarioLabel};

pub const PIVOT_DEG: f64 = 30.0;
pub const PIVOT_PERIOD_S: f64 = 20.0;
/// Time for one full scanning revolution.
pub const SCAN_CYCLE_S: f64 = PIVOT_PERIOD_S * 360.0 / PIVOT_DEG;
pub const MIN_OBSERVATIONS: usize = 10;
pub const RUNS_PER_CONDITION: usize = 10;

/// Mean and SD of the observation count per scenario.
pub const OBSERVATION_COUNT_STATS: [(f64, f64); 3] = [(134.92, 57.18), (38.54, 15.59), (70.46, 21.19)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given twice")]
    DuplicateKey(String),
    #[error("config key `{key}` has invalid value `{value}`")]
    BadValue { key: String, value: String },
    #[error("config line {line} is not `key = value`: {text}")]
    ConfigSyntax { line: usize, text: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("the empty-room scenario has no walker")]
    NoWalker,
    #[error("door pair ({0}, {1}) is invalid")]
    Doors(usize, usize),
}

/// Robot heading after `t` seconds of scanning, degrees in [0, 360).
pub fn scan_heading(t: f64) -> f64 {
    let pivots = (t / PIVOT_PERIOD_S).floor();
    (PIVOT_DEG * pivots).rem_euclid(360.0)
}

/// Number of observations recorded in one experiment: a normal draw with the
/// scenario's mean and SD, rounded, with values below 10 raised to 10.
pub fn sample_observation_count(scenario: ScenarioLabel, rng: &mut impl Rng) -> usize {
    let (mean, sd) = OBSERVATION_COUNT_STATS[scenario.index()];
    let x = Normal::new(mean, sd).expect("valid normal").sample(rng).round();
    if x < MIN_OBSERVATIONS as f64 { MIN_OBSERVATIONS } else { x as usize }
}

/// Simulates one experiment; identical arguments give identical output.
pub fn simulate_experiment(
    id: u32,
    scenario: ScenarioLabel,
    proximity: ProximityBand,
    seed: u64,
    config: &SimConfig,
) -> Result<Experiment, SimError> {
    let mut rng = rng_from_seed(seed);
    let n = sample_observation_count(scenario, &mut rng);
    let mut times = Vec::with_capacity(n);
    let mut t = 0.0;
    for i in 0..n {
        if i > 0 {
            t += rng.random_range(config.dt_lo..=config.dt_hi);
        }
        times.push(t);
    }
    let total = t;

    let door_start = rng.random_range(0..3usize);
    let door_end = (door_start + rng.random_range(1..3usize)) % 3;

    // Ambient conditions drift between runs.
    let mut env = config.clone();
    env.ambient_temp += config.ambient_temp_drift * rng.sample::<f64, _>(rand_distr::StandardNormal);
    env.ambient_light += config.ambient_light_drift * rng.sample::<f64, _>(rand_distr::StandardNormal);

    let path = match scenario {
        ScenarioLabel::EmptyRoom => WalkerPath::empty(),
        _ => build_walker_path(scenario, proximity, door_start, door_end, config, &mut rng)?.rescaled(total),
    };

    // The scan runs continuously across experiments, so each run starts at a
    // random point of the cycle. A walk-across that touches the robot is
    // aligned with the bumper: the robot faces the contact point to within
    // one pivot while the walker pauses there.
    let mut phase = rng.random_range(0.0..SCAN_CYCLE_S);
    if scenario == ScenarioLabel::WalkAcross && proximity == ProximityBand::Contact {
        let contact = path.position_at(path.closest_time).expect("occupied path");
        let step = (contact.bearing_deg() / PIVOT_DEG).round() as i64 + rng.random_range(-1..=1i64);
        let dwell = path
            .waypoints
            .iter()
            .find(|w| w.t > path.closest_time)
            .map_or(0.0, |w| w.t - path.closest_time);
        let slack = (1.0 - (dwell / PIVOT_PERIOD_S).min(0.9)).max(0.05);
        let within = rng.random_range(0.0..slack) * PIVOT_PERIOD_S;
        phase = (step as f64 * PIVOT_PERIOD_S + within - path.closest_time).rem_euclid(SCAN_CYCLE_S);
    }

    let observations = times
        .iter()
        .map(|&t| {
            let heading = scan_heading(phase + t);
            sense(t, heading, path.position_at(t), &env, &mut rng)
        })
        .collect();

    Ok(Experiment { id, scenario, proximity, door_start, door_end, observations })
}

/// Simulates the full 150-run campaign: ten runs of each of the fifteen
/// scenario × proximity conditions in random order. Experiment ids follow the
/// execution order; experiment `i` uses the stream `derive_seed(seed, i)`.
pub fn simulate_campaign(seed: u64, config: &SimConfig) -> Result<Dataset, SimError> {
    config.validate()?;
    let mut conditions: Vec<(ScenarioLabel, ProximityBand)> = ScenarioLabel::ALL
        .iter()
        .flat_map(|&s| ProximityBand::ALL.iter().map(move |&p| (s, p)))
        .flat_map(|c| std::iter::repeat_n(c, RUNS_PER_CONDITION))
        .collect();
    let mut rng = rng_from_seed(seed);
    conditions.shuffle(&mut rng);

    let experiments = conditions
        .par_iter()
        .enumerate()
        .map(|(i, &(s, p))| simulate_experiment(i as u32, s, p, derive_seed(seed, i as u64), config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset { experiments, provenance: Provenance { seed, config_digest: config.digest() } })
}
