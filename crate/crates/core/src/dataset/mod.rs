//! Experiments, campaigns and their CSV representation.
//!
//! A campaign is stored as one CSV row per observation. The first line is a
//! `#` comment carrying the provenance (campaign seed and config digest),
//! followed by the header
//!
//! ```text
//! experiment_id,scenario,proximity,door_start,door_end,t,ir_rear_medium,...,wheel_caster
//! ```
//!
//! Rows of one experiment are contiguous and ordered by time.

mod folds;
mod normalize;

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use folds::{make_folds, Fold, FoldPlan};
pub use normalize::{compute_stats, denormalize, normalize, NormalizationStats, VariableStats};

use crate::sensor::{
    sensor_names, validate_observation, Observation, ProximityBand, ScenarioLabel, SensorError, N_SENSORS,
    SENSOR_SPECS,
};

pub const LABEL_COLUMNS: [&str; 5] = ["experiment_id", "scenario", "proximity", "door_start", "door_end"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header mismatch: expected {expected} columns `{}`, found `{found}`", .expected_names)]
    Header { expected: usize, expected_names: String, found: String },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("line {line}: {source}")]
    Sensor { line: u64, source: SensorError },
    #[error("need at least 2 observations to compute statistics, got {0}")]
    TooFewObservations(usize),
    #[error("condition {scenario}/{proximity} has {count} experiments, expected {expected}")]
    UnevenConditions { scenario: usize, proximity: usize, count: usize, expected: usize },
    #[error("fold count {0} must be at least 2 and at most the experiments per condition")]
    FoldCount(usize),
    #[error("duplicate experiment id {0}")]
    DuplicateId(u32),
    #[error("experiment {0}: {1}")]
    InvalidExperiment(u32, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub id: u32,
    pub scenario: ScenarioLabel,
    pub proximity: ProximityBand,
    pub door_start: usize,
    pub door_end: usize,
    pub observations: Vec<Observation>,
}

impl Experiment {
    /// Index of the scenario × proximity cell, 0..15.
    pub fn condition(&self) -> usize {
        self.scenario.index() * ProximityBand::ALL.len() + self.proximity.index()
    }

    pub fn check(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::InvalidExperiment(self.id, m.to_string()));
        if self.observations.is_empty() {
            return bad("no observations");
        }
        if self.door_start == self.door_end || self.door_start > 2 || self.door_end > 2 {
            return bad("invalid door pair");
        }
        if self.observations.windows(2).any(|w| w[1].t <= w[0].t) {
            return bad("timestamps not strictly increasing");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub experiments: Vec<Experiment>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn get(&self, id: u32) -> Option<&Experiment> {
        self.experiments.iter().find(|e| e.id == id)
    }

    pub fn n_observations(&self) -> usize {
        self.experiments.iter().map(|e| e.observations.len()).sum()
    }

    pub fn check(&self) -> Result<(), DatasetError> {
        let mut ids = HashSet::new();
        for e in &self.experiments {
            if !ids.insert(e.id) {
                return Err(DatasetError::DuplicateId(e.id));
            }
            e.check()?;
        }
        Ok(())
    }

    /// Writes the campaign CSV into any writer.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), DatasetError> {
        writeln!(out, "# seed={} config_digest={}", self.provenance.seed, self.provenance.config_digest)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header())?;
        let mut row: Vec<String> = Vec::with_capacity(LABEL_COLUMNS.len() + 1 + N_SENSORS);
        for e in &self.experiments {
            for o in &e.observations {
                row.clear();
                row.extend([
                    e.id.to_string(),
                    e.scenario.index().to_string(),
                    e.proximity.index().to_string(),
                    e.door_start.to_string(),
                    e.door_end.to_string(),
                    o.t.to_string(),
                ]);
                row.extend(o.values().iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DatasetError> {
        parse_csv(text)
    }
}

fn header() -> Vec<&'static str> {
    let mut h: Vec<&str> = LABEL_COLUMNS.to_vec();
    h.push("t");
    h.extend(sensor_names());
    h
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let file = fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    dataset.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    parse_csv(&fs::read_to_string(path)?)
}

fn parse_provenance(line: &str) -> Result<Provenance, DatasetError> {
    let mut seed = None;
    let mut digest = None;
    for part in line.trim_start_matches('#').split_whitespace() {
        match part.split_once('=') {
            Some(("seed", v)) => seed = v.parse().ok(),
            Some(("config_digest", v)) => digest = Some(v.to_string()),
            _ => {}
        }
    }
    match (seed, digest) {
        (Some(seed), Some(config_digest)) => Ok(Provenance { seed, config_digest }),
        _ => Err(DatasetError::Row { line: 1, message: format!("malformed provenance line `{line}`") }),
    }
}

fn parse_csv(text: &str) -> Result<Dataset, DatasetError> {
    let (provenance, body, offset) = match text.split_once('\n') {
        Some((first, rest)) if first.starts_with('#') => (parse_provenance(first.trim_end())?, rest, 1),
        _ => (Provenance { seed: 0, config_digest: String::new() }, text, 0),
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let expected = header();
    let found = reader.headers()?.clone();
    if found.len() != expected.len() || found.iter().zip(&expected).any(|(a, b)| a.trim() != *b) {
        return Err(DatasetError::Header {
            expected: expected.len(),
            expected_names: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut experiments: Vec<Experiment> = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() + offset);
            DatasetError::Row { line, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line()) + offset;
        let field = |i: usize| -> Result<f64, DatasetError> {
            let raw = record.get(i).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|_| DatasetError::Row {
                line,
                message: format!("column `{}`: cannot parse `{raw}` as a number", expected[i]),
            })
        };
        let int = |i: usize| -> Result<u64, DatasetError> {
            let v = field(i)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(DatasetError::Row {
                    line,
                    message: format!("column `{}`: `{v}` is not a non-negative integer", expected[i]),
                });
            }
            Ok(v as u64)
        };
        let id = int(0)? as u32;
        let scenario = ScenarioLabel::from_index(int(1)? as usize)
            .ok_or_else(|| DatasetError::Row { line, message: "scenario must be 0, 1 or 2".into() })?;
        let proximity = ProximityBand::from_index(int(2)? as usize)
            .ok_or_else(|| DatasetError::Row { line, message: "proximity must be in 0..5".into() })?;
        let (door_start, door_end) = (int(3)? as usize, int(4)? as usize);
        let t = field(5)?;
        let mut values = [0.0; N_SENSORS];
        for (k, v) in values.iter_mut().enumerate() {
            *v = field(6 + k)?;
            let spec = &SENSOR_SPECS[k];
            let integral = v.fract() == 0.0;
            if spec.kind != crate::sensor::SensorKind::Temperature && !integral {
                return Err(DatasetError::Row {
                    line,
                    message: format!("column `{}`: `{v}` is not an integer", spec.name),
                });
            }
        }
        let obs = Observation::from_values(t, &values);
        validate_observation(&obs, &SENSOR_SPECS).map_err(|source| DatasetError::Sensor { line, source })?;

        match experiments.last_mut() {
            Some(e) if e.id == id => {
                if (e.scenario, e.proximity, e.door_start, e.door_end) != (scenario, proximity, door_start, door_end) {
                    return Err(DatasetError::Row { line, message: format!("labels change within experiment {id}") });
                }
                if t <= e.observations.last().map_or(f64::NEG_INFINITY, |o| o.t) {
                    return Err(DatasetError::Row { line, message: "timestamps must increase".into() });
                }
                e.observations.push(obs);
            }
            _ => {
                if !seen.insert(id) {
                    return Err(DatasetError::Row { line, message: format!("experiment {id} rows are not contiguous") });
                }
                if door_start == door_end || door_start > 2 || door_end > 2 {
                    return Err(DatasetError::Row { line, message: "invalid door pair".into() });
                }
                experiments.push(Experiment { id, scenario, proximity, door_start, door_end, observations: vec![obs] });
            }
        }
    }
    Ok(Dataset { experiments, provenance })
}
