//! Sensor response model.

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::SimConfig;
use super::geometry::{signed_diff_deg, Point};
use crate::sensor::{Observation, ADC10_MAX, ADC12_MAX};

/// Half-width of the bumper arc around the heading, degrees.
pub const BUMPER_HALF_ARC_DEG: f64 = 90.0;
/// Contacts within this angle of the heading press both switches.
pub const BUMPER_CENTER_DEG: f64 = 10.0;

const VOLTS_TO_COUNTS: f64 = ADC10_MAX / 5.0;
pub const IR_MEDIUM_RANGE_CM: (f64, f64) = (4.0, 30.0);
pub const IR_LONG_RANGE_CM: (f64, f64) = (15.0, 150.0);

/// Medium-range rear IR output inside its range, counts.
pub fn ir_medium_response(d_cm: f64) -> f64 {
    let d = d_cm.max(IR_MEDIUM_RANGE_CM.0);
    12.08 / (d + 0.42) * VOLTS_TO_COUNTS
}

/// Long-range rear IR output inside its range, counts.
pub fn ir_long_response(d_cm: f64) -> f64 {
    let d = d_cm.max(IR_LONG_RANGE_CM.0);
    61.6 / (d + 5.5) * VOLTS_TO_COUNTS
}

fn gauss(rng: &mut impl Rng, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * sd
}

fn counts(x: f64, hi: f64) -> i32 {
    x.round().clamp(0.0, hi) as i32
}

fn centi(x: f64) -> f64 {
    ((x * 100.0).round() / 100.0).clamp(-70.0, 380.0)
}

/// Produces one observation for a robot facing `heading_deg` with the walker
/// at `walker` (room coordinates) or absent.
///
/// The noise draws happen in a fixed order regardless of the walker, so the
/// random stream consumed per observation is constant.
pub fn sense(
    t: f64,
    heading_deg: f64,
    walker: Option<Point>,
    config: &SimConfig,
    rng: &mut impl Rng,
) -> Observation {
    let geo = walker.map(|p| {
        let center = p.norm();
        let clearance = (center - config.robot_radius_cm).max(0.0);
        (center, clearance, p.bearing_deg())
    });

    // Thermometers face forward (a) and backward (b).
    let offset = config.therm_heading_amp * heading_deg.to_radians().sin();
    let body_heat = |facing: f64| match geo {
        Some((_, clearance, bearing))
            if signed_diff_deg(bearing, facing).abs() <= config.therm_fov_half_angle =>
        {
            (config.body_temp - config.ambient_temp)
                * config.therm_coupling
                * (-clearance / config.therm_decay_cm).exp()
        }
        _ => 0.0,
    };
    let therm_a = config.ambient_temp + offset + body_heat(heading_deg) + gauss(rng, config.therm_noise);
    let therm_b =
        config.ambient_temp - offset + body_heat(heading_deg + 180.0) + gauss(rng, config.therm_noise);

    let facing_light = (heading_deg - config.light_bearing).to_radians().cos();
    let mut light = config.ambient_light * (1.0 - config.photo_heading_depth * (1.0 - facing_light) / 2.0);
    if let Some((center, clearance, bearing)) = geo {
        let dim = config.presence_dim * (-clearance / config.presence_decay_cm).exp();
        let width = config.shadow_width_cm.atan2(center.max(1.0)).to_degrees();
        let off = signed_diff_deg(bearing, config.light_bearing) / width;
        let shadow = config.shadow_depth * (-off * off).exp() * (-clearance / config.shadow_decay_cm).exp();
        light *= 1.0 - dim - shadow;
    }
    let photo = light + gauss(rng, config.photo_noise);

    let rear = heading_deg + 180.0;
    let behind = geo.filter(|&(_, _, b)| signed_diff_deg(b, rear).abs() <= config.ir_beam_half_angle);
    let medium = match behind {
        Some((_, d, _)) if d <= IR_MEDIUM_RANGE_CM.1 => ir_medium_response(d),
        _ => config.ir_medium_background,
    } + gauss(rng, config.ir_noise);
    let long = match behind {
        Some((_, d, _)) if d <= IR_LONG_RANGE_CM.1 => ir_long_response(d),
        _ => config.ir_long_background,
    } + gauss(rng, config.ir_noise);

    let floor = geo.map_or(0.0, |(_, c, _)| (-c / config.floor_decay_cm).exp());
    let cliff_sd = config.cliff_noise + config.floor_vibration * floor;
    let mut cliff = [0i32; 4];
    for (slot, base) in cliff.iter_mut().zip(config.cliff_base) {
        *slot = counts(base - config.floor_deflection * floor + gauss(rng, cliff_sd), ADC12_MAX);
    }
    let wall = counts(config.wall_background + gauss(rng, config.wall_noise), ADC12_MAX);

    let (bump_left, bump_right) = match geo {
        Some((_, clearance, bearing)) if clearance <= config.contact_reach_cm => {
            let rel = signed_diff_deg(bearing, heading_deg);
            if rel.abs() > BUMPER_HALF_ARC_DEG {
                (false, false)
            } else if rel > BUMPER_CENTER_DEG {
                (true, false)
            } else if rel < -BUMPER_CENTER_DEG {
                (false, true)
            } else {
                (true, true)
            }
        }
        _ => (false, false),
    };

    Observation {
        t,
        ir_rear_medium: counts(medium, ADC10_MAX),
        ir_rear_long: counts(long, ADC10_MAX),
        photo: counts(photo, ADC10_MAX),
        therm_a: centi(therm_a),
        therm_b: centi(therm_b),
        cliff_left: cliff[0],
        cliff_front_left: cliff[1],
        cliff_front_right: cliff[2],
        cliff_right: cliff[3],
        wall,
        bump_left,
        bump_right,
        wheel_left: false,
        wheel_right: false,
        wheel_caster: false,
    }
}
