//! The robot's sensor vocabulary.
//!
//! Fifteen variables are recorded per observation: two rear-facing IR range
//! sensors, a photocell, two IR thermometers, four cliff sensors, the wall
//! sensor, two bumper switches and three wheel-drop switches. The ordering of
//! [`SENSOR_SPECS`] is the canonical column and feature order used everywhere
//! else in the crate.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of sensor variables in one observation.
pub const N_SENSORS: usize = 15;

/// Ceiling of the 10-bit converters on the auxiliary board.
pub const ADC10_MAX: f64 = 1023.0;
/// Ceiling of the 12-bit IR counts reported by the base platform.
pub const ADC12_MAX: f64 = 4095.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorKind {
    IntegerAdc,
    Temperature,
    Boolean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorSpec {
    pub name: &'static str,
    pub kind: SensorKind,
    pub lo: f64,
    pub hi: f64,
    pub units: &'static str,
}

impl SensorSpec {
    pub fn is_numeric(&self) -> bool {
        self.kind != SensorKind::Boolean
    }

    pub fn contains(&self, value: f64) -> bool {
        value.is_finite() && value >= self.lo && value <= self.hi
    }
}

const fn adc(name: &'static str, hi: f64, units: &'static str) -> SensorSpec {
    SensorSpec { name, kind: SensorKind::IntegerAdc, lo: 0.0, hi, units }
}

const fn temp(name: &'static str) -> SensorSpec {
    // MLX90614 object-temperature range.
    SensorSpec { name, kind: SensorKind::Temperature, lo: -70.0, hi: 380.0, units: "degC" }
}

const fn switch(name: &'static str) -> SensorSpec {
    SensorSpec { name, kind: SensorKind::Boolean, lo: 0.0, hi: 1.0, units: "bool" }
}

/// Canonical ordered sensor list.
pub const SENSOR_SPECS: [SensorSpec; N_SENSORS] = [
    adc("ir_rear_medium", ADC10_MAX, "adc"),
    adc("ir_rear_long", ADC10_MAX, "adc"),
    adc("photo", ADC10_MAX, "adc"),
    temp("therm_a"),
    temp("therm_b"),
    adc("cliff_left", ADC12_MAX, "ir"),
    adc("cliff_front_left", ADC12_MAX, "ir"),
    adc("cliff_front_right", ADC12_MAX, "ir"),
    adc("cliff_right", ADC12_MAX, "ir"),
    adc("wall", ADC12_MAX, "ir"),
    switch("bump_left"),
    switch("bump_right"),
    switch("wheel_left"),
    switch("wheel_right"),
    switch("wheel_caster"),
];

/// Sensor names in canonical order.
pub fn sensor_names() -> [&'static str; N_SENSORS] {
    SENSOR_SPECS.map(|s| s.name)
}

/// Indices (into the canonical order) of the numeric, non-boolean sensors.
pub fn numeric_indices() -> impl Iterator<Item = usize> {
    SENSOR_SPECS.iter().enumerate().filter(|(_, s)| s.is_numeric()).map(|(i, _)| i)
}

pub const IDX_PHOTO: usize = 2;
pub const IDX_THERM_A: usize = 3;
pub const IDX_THERM_B: usize = 4;
pub const IDX_BUMP_LEFT: usize = 10;
pub const IDX_BUMP_RIGHT: usize = 11;
pub const IDX_WHEELS: [usize; 3] = [12, 13, 14];

/// One timestamped reading of every sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Seconds since the experiment started.
    pub t: f64,
    pub ir_rear_medium: i32,
    pub ir_rear_long: i32,
    pub photo: i32,
    pub therm_a: f64,
    pub therm_b: f64,
    pub cliff_left: i32,
    pub cliff_front_left: i32,
    pub cliff_front_right: i32,
    pub cliff_right: i32,
    pub wall: i32,
    pub bump_left: bool,
    pub bump_right: bool,
    pub wheel_left: bool,
    pub wheel_right: bool,
    pub wheel_caster: bool,
}

impl Observation {
    /// Sensor values in canonical order, booleans as 0/1.
    pub fn values(&self) -> [f64; N_SENSORS] {
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        [
            self.ir_rear_medium as f64,
            self.ir_rear_long as f64,
            self.photo as f64,
            self.therm_a,
            self.therm_b,
            self.cliff_left as f64,
            self.cliff_front_left as f64,
            self.cliff_front_right as f64,
            self.cliff_right as f64,
            self.wall as f64,
            b(self.bump_left),
            b(self.bump_right),
            b(self.wheel_left),
            b(self.wheel_right),
            b(self.wheel_caster),
        ]
    }

    /// Inverse of [`Observation::values`]. Integer channels are rounded and
    /// booleans are true for any value ≥ 0.5.
    pub fn from_values(t: f64, v: &[f64; N_SENSORS]) -> Self {
        let i = |x: f64| x.round() as i32;
        let b = |x: f64| x >= 0.5;
        Observation {
            t,
            ir_rear_medium: i(v[0]),
            ir_rear_long: i(v[1]),
            photo: i(v[2]),
            therm_a: v[3],
            therm_b: v[4],
            cliff_left: i(v[5]),
            cliff_front_left: i(v[6]),
            cliff_front_right: i(v[7]),
            cliff_right: i(v[8]),
            wall: i(v[9]),
            bump_left: b(v[10]),
            bump_right: b(v[11]),
            wheel_left: b(v[12]),
            wheel_right: b(v[13]),
            wheel_caster: b(v[14]),
        }
    }

    pub fn bump_state(&self) -> u8 {
        bump_state(self.bump_left, self.bump_right)
    }
}

/// Combined bumper state: 0 none, 1 left, 2 right, 3 centre (both switches).
pub fn bump_state(bump_left: bool, bump_right: bool) -> u8 {
    match (bump_left, bump_right) {
        (false, false) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (true, true) => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensorError {
    #[error("sensor {field} value {value} outside [{lo}, {hi}]")]
    OutOfRange { field: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("timestamp {0} is negative or not finite")]
    BadTimestamp(f64),
    #[error("expected {N_SENSORS} sensor descriptors, got {0}")]
    SpecCount(usize),
}

/// Checks every field of `obs` against the matching spec.
pub fn validate_observation(obs: &Observation, specs: &[SensorSpec]) -> Result<(), SensorError> {
    if specs.len() != N_SENSORS {
        return Err(SensorError::SpecCount(specs.len()));
    }
    if !(obs.t.is_finite() && obs.t >= 0.0) {
        return Err(SensorError::BadTimestamp(obs.t));
    }
    for (spec, value) in specs.iter().zip(obs.values()) {
        if !spec.contains(value) {
            return Err(SensorError::OutOfRange { field: spec.name, value, lo: spec.lo, hi: spec.hi });
        }
    }
    Ok(())
}

/// Scenario acted out around the robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioLabel {
    EmptyRoom = 0,
    WalkAcross = 1,
    WalkAround = 2,
}

impl ScenarioLabel {
    pub const ALL: [ScenarioLabel; 3] =
        [ScenarioLabel::EmptyRoom, ScenarioLabel::WalkAcross, ScenarioLabel::WalkAround];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for ScenarioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Closest-approach band, measured as clearance from the robot's body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProximityBand {
    Contact = 0,
    Cm1To20 = 1,
    Cm21To40 = 2,
    Cm41To60 = 3,
    Cm61To80 = 4,
}

impl ProximityBand {
    pub const ALL: [ProximityBand; 5] = [
        ProximityBand::Contact,
        ProximityBand::Cm1To20,
        ProximityBand::Cm21To40,
        ProximityBand::Cm41To60,
        ProximityBand::Cm61To80,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Clearance range in cm; `(0, 0)` for contact.
    pub fn range_cm(self) -> (f64, f64) {
        match self {
            ProximityBand::Contact => (0.0, 0.0),
            ProximityBand::Cm1To20 => (1.0, 20.0),
            ProximityBand::Cm21To40 => (21.0, 40.0),
            ProximityBand::Cm41To60 => (41.0, 60.0),
            ProximityBand::Cm61To80 => (61.0, 80.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProximityBand::Contact => "contact",
            ProximityBand::Cm1To20 => "1-20cm",
            ProximityBand::Cm21To40 => "21-40cm",
            ProximityBand::Cm41To60 => "41-60cm",
            ProximityBand::Cm61To80 => "61-80cm",
        }
    }
}
