//! Simulator configuration and its flat `key = value` file format.
//!
//! The room geometry, light placement and most sensor constants have no
//! measured values behind them; the defaults are conventions chosen so that
//! the simulated readings stay within the sensor ranges and the three
//! scenarios leave distinguishable traces.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::geometry::Point;
use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt_lo: f64,
    pub dt_hi: f64,
    pub ambient_temp: f64,
    pub ambient_temp_drift: f64,
    pub body_temp: f64,
    pub therm_heading_amp: f64,
    pub therm_fov_half_angle: f64,
    pub therm_coupling: f64,
    pub therm_decay_cm: f64,
    pub therm_noise: f64,
    pub ambient_light: f64,
    pub ambient_light_drift: f64,
    pub light_bearing: f64,
    pub photo_heading_depth: f64,
    pub shadow_depth: f64,
    pub shadow_width_cm: f64,
    pub shadow_decay_cm: f64,
    pub presence_dim: f64,
    pub presence_decay_cm: f64,
    pub photo_noise: f64,
    pub ir_medium_background: f64,
    pub ir_long_background: f64,
    pub ir_beam_half_angle: f64,
    pub ir_noise: f64,
    pub cliff_base: [f64; 4],
    pub cliff_noise: f64,
    pub floor_deflection: f64,
    pub floor_vibration: f64,
    pub floor_decay_cm: f64,
    pub wall_background: f64,
    pub wall_noise: f64,
    pub walker_speed: f64,
    pub circling_speed: f64,
    pub contact_dwell_s: f64,
    pub contact_reach_cm: f64,
    pub path_jitter_deg: f64,
    pub robot_radius_cm: f64,
    pub room_width_cm: f64,
    pub room_depth_cm: f64,
    pub doors: [Point; 3],
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_lo: 0.1,
            dt_hi: 0.2,
            ambient_temp: 22.0,
            ambient_temp_drift: 0.15,
            body_temp: 33.0,
            // 1 degF peak difference between the opposed thermometers.
            therm_heading_amp: 0.278,
            therm_fov_half_angle: 50.0,
            therm_coupling: 0.35,
            therm_decay_cm: 60.0,
            therm_noise: 0.05,
            ambient_light: 620.0,
            ambient_light_drift: 6.0,
            light_bearing: 45.0,
            photo_heading_depth: 0.12,
            shadow_depth: 0.35,
            shadow_width_cm: 25.0,
            shadow_decay_cm: 120.0,
            presence_dim: 0.05,
            presence_decay_cm: 150.0,
            photo_noise: 3.0,
            ir_medium_background: 62.0,
            ir_long_background: 72.0,
            ir_beam_half_angle: 20.0,
            ir_noise: 4.0,
            cliff_base: [880.0, 1210.0, 1160.0, 940.0],
            cliff_noise: 1.5,
            floor_deflection: 40.0,
            floor_vibration: 1.0,
            floor_decay_cm: 80.0,
            wall_background: 6.0,
            wall_noise: 1.5,
            walker_speed: 100.0,
            circling_speed: 25.0,
            contact_dwell_s: 1.0,
            contact_reach_cm: 1.0,
            path_jitter_deg: 15.0,
            robot_radius_cm: 17.0,
            room_width_cm: 460.0,
            room_depth_cm: 460.0,
            doors: [Point::new(-230.0, 0.0), Point::new(133.0, 230.0), Point::new(133.0, -230.0)],
        }
    }
}

const DESCRIPTIONS: &[(&str, &str)] = &[
    ("dt_lo", "shortest sampling interval, s"),
    ("dt_hi", "longest sampling interval, s"),
    ("ambient_temp", "room temperature, degC"),
    ("ambient_temp_drift", "per-experiment SD of the room temperature, degC"),
    ("body_temp", "apparent surface temperature of the walker, degC"),
    ("therm_heading_amp", "heading-dependent thermometer offset amplitude, degC"),
    ("therm_fov_half_angle", "thermometer field-of-view half angle, deg"),
    ("therm_coupling", "fraction of the body/room contrast seen at contact"),
    ("therm_decay_cm", "distance scale of the body-heat reading, cm"),
    ("therm_noise", "thermometer noise SD, degC"),
    ("ambient_light", "photocell reading facing the light source, counts"),
    ("ambient_light_drift", "per-experiment SD of the light level, counts"),
    ("light_bearing", "bearing of the main light source, deg"),
    ("photo_heading_depth", "relative drop when facing away from the light"),
    ("shadow_depth", "relative drop under a full shadow"),
    ("shadow_width_cm", "half width of the walker's shadow, cm"),
    ("shadow_decay_cm", "distance scale of the shadow strength, cm"),
    ("presence_dim", "relative diffuse dimming from a nearby walker"),
    ("presence_decay_cm", "distance scale of diffuse dimming, cm"),
    ("photo_noise", "photocell noise SD, counts"),
    ("ir_medium_background", "medium-range IR reading with nothing in range, counts"),
    ("ir_long_background", "long-range IR reading with nothing in range, counts"),
    ("ir_beam_half_angle", "rear IR beam half angle, deg"),
    ("ir_noise", "rear IR noise SD, counts"),
    ("cliff_left_base", "floor reading of the left cliff sensor, counts"),
    ("cliff_front_left_base", "floor reading of the front-left cliff sensor, counts"),
    ("cliff_front_right_base", "floor reading of the front-right cliff sensor, counts"),
    ("cliff_right_base", "floor reading of the right cliff sensor, counts"),
    ("cliff_noise", "cliff sensor noise SD, counts"),
    ("floor_deflection", "cliff drop from the walker's weight at contact, counts"),
    ("floor_vibration", "extra cliff noise SD from footsteps at contact, counts"),
    ("floor_decay_cm", "distance scale of floor effects, cm"),
    ("wall_background", "wall sensor reading in open floor, counts"),
    ("wall_noise", "wall sensor noise SD, counts"),
    ("walker_speed", "walking speed between doors and robot, cm/s"),
    ("circling_speed", "walking speed while circling the robot, cm/s"),
    ("contact_dwell_s", "time spent touching the bumper on contact runs, s"),
    ("contact_reach_cm", "clearance at which the bumper registers contact, cm"),
    ("path_jitter_deg", "random rotation of the crossing point, deg"),
    ("robot_radius_cm", "robot body radius, cm"),
    ("room_width_cm", "room extent along x (robot at the centre), cm"),
    ("room_depth_cm", "room extent along y, cm"),
    ("door0_x", "door 0 position, cm"),
    ("door0_y", ""),
    ("door1_x", "door 1 position, cm"),
    ("door1_y", ""),
    ("door2_x", "door 2 position, cm"),
    ("door2_y", ""),
];

impl SimConfig {
    fn fields(&self) -> Vec<(&'static str, f64)> {
        let mut copy = self.clone();
        copy.fields_mut().into_iter().map(|(k, v)| (k, *v)).collect()
    }

    fn fields_mut(&mut self) -> Vec<(&'static str, &mut f64)> {
        let [c0, c1, c2, c3] = &mut self.cliff_base;
        let [d0, d1, d2] = &mut self.doors;
        vec![
            ("dt_lo", &mut self.dt_lo),
            ("dt_hi", &mut self.dt_hi),
            ("ambient_temp", &mut self.ambient_temp),
            ("ambient_temp_drift", &mut self.ambient_temp_drift),
            ("body_temp", &mut self.body_temp),
            ("therm_heading_amp", &mut self.therm_heading_amp),
            ("therm_fov_half_angle", &mut self.therm_fov_half_angle),
            ("therm_coupling", &mut self.therm_coupling),
            ("therm_decay_cm", &mut self.therm_decay_cm),
            ("therm_noise", &mut self.therm_noise),
            ("ambient_light", &mut self.ambient_light),
            ("ambient_light_drift", &mut self.ambient_light_drift),
            ("light_bearing", &mut self.light_bearing),
            ("photo_heading_depth", &mut self.photo_heading_depth),
            ("shadow_depth", &mut self.shadow_depth),
            ("shadow_width_cm", &mut self.shadow_width_cm),
            ("shadow_decay_cm", &mut self.shadow_decay_cm),
            ("presence_dim", &mut self.presence_dim),
            ("presence_decay_cm", &mut self.presence_decay_cm),
            ("photo_noise", &mut self.photo_noise),
            ("ir_medium_background", &mut self.ir_medium_background),
            ("ir_long_background", &mut self.ir_long_background),
            ("ir_beam_half_angle", &mut self.ir_beam_half_angle),
            ("ir_noise", &mut self.ir_noise),
            ("cliff_left_base", c0),
            ("cliff_front_left_base", c1),
            ("cliff_front_right_base", c2),
            ("cliff_right_base", c3),
            ("cliff_noise", &mut self.cliff_noise),
            ("floor_deflection", &mut self.floor_deflection),
            ("floor_vibration", &mut self.floor_vibration),
            ("floor_decay_cm", &mut self.floor_decay_cm),
            ("wall_background", &mut self.wall_background),
            ("wall_noise", &mut self.wall_noise),
            ("walker_speed", &mut self.walker_speed),
            ("circling_speed", &mut self.circling_speed),
            ("contact_dwell_s", &mut self.contact_dwell_s),
            ("contact_reach_cm", &mut self.contact_reach_cm),
            ("path_jitter_deg", &mut self.path_jitter_deg),
            ("robot_radius_cm", &mut self.robot_radius_cm),
            ("room_width_cm", &mut self.room_width_cm),
            ("room_depth_cm", &mut self.room_depth_cm),
            ("door0_x", &mut d0.x),
            ("door0_y", &mut d0.y),
            ("door1_x", &mut d1.x),
            ("door1_y", &mut d1.y),
            ("door2_x", &mut d2.x),
            ("door2_y", &mut d2.y),
        ]
    }

    /// Parses a `key = value` file body. Keys not present keep their default.
    pub fn from_kv_str(text: &str) -> Result<Self, SimError> {
        let mut cfg = SimConfig::default();
        let mut seen = std::collections::HashSet::new();
        {
            let mut fields = cfg.fields_mut();
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| SimError::ConfigSyntax {
                    line: lineno + 1,
                    text: raw.to_string(),
                })?;
                let key = key.trim();
                let slot = fields
                    .iter_mut()
                    .find(|(k, _)| *k == key)
                    .ok_or_else(|| SimError::UnknownKey(key.to_string()))?;
                if !seen.insert(slot.0) {
                    return Err(SimError::DuplicateKey(key.to_string()));
                }
                let parsed: f64 = value.trim().parse().map_err(|_| SimError::BadValue {
                    key: key.to_string(),
                    value: value.trim().to_string(),
                })?;
                if !parsed.is_finite() {
                    return Err(SimError::BadValue { key: key.to_string(), value: value.trim().to_string() });
                }
                *slot.1 = parsed;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_kv_str(&text)
    }

    /// Canonical file body with one documented line per key.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.fields() {
            let desc = DESCRIPTIONS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d).unwrap_or("");
            if !desc.is_empty() {
                let _ = writeln!(out, "# {desc}");
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// Hex SHA-256 of the canonical key-value body (comments excluded).
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (key, value) in self.fields() {
            hasher.update(format!("{key}={value}\n").as_bytes());
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(SimError::Invalid(msg.to_string())) };
        check(self.dt_lo > 0.0 && self.dt_lo <= self.dt_hi, "need 0 < dt_lo <= dt_hi")?;
        check(self.body_temp > self.ambient_temp, "need body_temp > ambient_temp")?;
        check(self.walker_speed > 0.0 && self.circling_speed > 0.0, "walking speeds must be positive")?;
        check(self.robot_radius_cm > 0.0, "robot_radius_cm must be positive")?;
        check(self.contact_reach_cm >= 0.0 && self.contact_dwell_s >= 0.0, "contact parameters must be >= 0")?;
        check(
            self.therm_fov_half_angle > 0.0 && self.therm_fov_half_angle <= 180.0,
            "therm_fov_half_angle must be in (0, 180]",
        )?;
        check(self.ir_beam_half_angle > 0.0 && self.ir_beam_half_angle <= 180.0, "ir_beam_half_angle must be in (0, 180]")?;
        for (k, v) in self.fields() {
            if (k.ends_with("_noise") || k.ends_with("_drift") || k.ends_with("_decay_cm")) && v < 0.0 {
                return Err(SimError::Invalid(format!("{k} must be >= 0")));
            }
        }
        check(self.therm_decay_cm > 0.0 && self.shadow_decay_cm > 0.0, "decay lengths must be positive")?;
        check(self.presence_decay_cm > 0.0 && self.floor_decay_cm > 0.0, "decay lengths must be positive")?;
        check(self.shadow_width_cm > 0.0, "shadow_width_cm must be positive")?;
        let (hw, hd) = (self.room_width_cm / 2.0, self.room_depth_cm / 2.0);
        let outer = self.robot_radius_cm + 80.0;
        check(hw > outer && hd > outer, "room too small for the 61-80 cm band")?;
        for (i, d) in self.doors.iter().enumerate() {
            let on_x_wall = (d.x.abs() - hw).abs() < 1e-6 && d.y.abs() <= hd + 1e-6;
            let on_y_wall = (d.y.abs() - hd).abs() < 1e-6 && d.x.abs() <= hw + 1e-6;
            if !(on_x_wall || on_y_wall) {
                return Err(SimError::Invalid(format!("door{i} is not on the room boundary")));
            }
        }
        // Every crossing must be able to pass the robot at the widest band
        // with two straight legs through the bisector point.
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let (a, b) = (self.doors[i], self.doors[j]);
                let u = (a.unit() + b.unit()).unit();
                if !(a.dot(u) >= outer && b.dot(u) >= outer) {
                    return Err(SimError::Invalid(format!(
                        "doors {i} and {j} are too far apart in bearing for a two-leg crossing"
                    )));
                }
            }
        }
        Ok(())
    }
}
