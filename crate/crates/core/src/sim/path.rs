//! Walker trajectories for the two occupied scenarios.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::geometry::{segment_distance_to_origin, Point};
use super::SimError;
use crate::sensor::{ProximityBand, ScenarioLabel};

/// Angular step of the polygon used for circling the robot.
const CIRCLE_STEP_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub pos: Point,
    /// Arrival time in seconds.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerPath {
    pub scenario: ScenarioLabel,
    pub waypoints: Vec<Waypoint>,
    /// Smallest clearance between the path and the robot body, cm.
    pub closest_approach_cm: f64,
    /// Time at which the walker first reaches the closest point.
    pub closest_time: f64,
}

impl WalkerPath {
    pub fn empty() -> Self {
        WalkerPath {
            scenario: ScenarioLabel::EmptyRoom,
            waypoints: Vec::new(),
            closest_approach_cm: f64::INFINITY,
            closest_time: 0.0,
        }
    }

    pub fn duration(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.t)
    }

    /// Linear interpolation along the path, clamped to its ends.
    pub fn position_at(&self, t: f64) -> Option<Point> {
        let first = self.waypoints.first()?;
        if t <= first.t {
            return Some(first.pos);
        }
        let k = self.waypoints.partition_point(|w| w.t <= t);
        if k >= self.waypoints.len() {
            return Some(self.waypoints.last()?.pos);
        }
        let (a, b) = (self.waypoints[k - 1], self.waypoints[k]);
        let span = b.t - a.t;
        if span <= 0.0 {
            return Some(b.pos);
        }
        let s = (t - a.t) / span;
        Some(a.pos + (b.pos - a.pos) * s)
    }

    /// Rescales arrival times so the walk spans `[0, total]`.
    pub fn rescaled(&self, total: f64) -> WalkerPath {
        let d = self.duration();
        let k = if d > 0.0 { total / d } else { 0.0 };
        WalkerPath {
            scenario: self.scenario,
            waypoints: self.waypoints.iter().map(|w| Waypoint { pos: w.pos, t: w.t * k }).collect(),
            closest_approach_cm: self.closest_approach_cm,
            closest_time: self.closest_time * k,
        }
    }

    /// Total signed angle swept around the robot, degrees.
    pub fn winding_deg(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].pos, w[1].pos);
                let cross = a.x * b.y - a.y * b.x;
                cross.atan2(a.dot(b)).to_degrees()
            })
            .sum()
    }

    /// Minimum distance from the path to the robot centre.
    pub fn min_center_distance(&self) -> f64 {
        match self.waypoints.len() {
            0 => f64::INFINITY,
            1 => self.waypoints[0].pos.norm(),
            _ => self
                .waypoints
                .windows(2)
                .map(|w| segment_distance_to_origin(w[0].pos, w[1].pos))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

struct PathBuilder {
    points: Vec<Waypoint>,
}

impl PathBuilder {
    fn start(p: Point) -> Self {
        PathBuilder { points: vec![Waypoint { pos: p, t: 0.0 }] }
    }

    fn last(&self) -> Waypoint {
        *self.points.last().expect("non-empty")
    }

    fn walk_to(&mut self, p: Point, speed: f64) {
        let prev = self.last();
        let t = prev.t + (p - prev.pos).norm() / speed;
        self.points.push(Waypoint { pos: p, t });
    }

    fn dwell(&mut self, secs: f64) {
        if secs > 0.0 {
            let prev = self.last();
            self.points.push(Waypoint { pos: prev.pos, t: prev.t + secs });
        }
    }
}

fn sample_clearance(band: ProximityBand, rng: &mut impl Rng) -> f64 {
    match band {
        ProximityBand::Contact => 0.0,
        b => {
            let (lo, hi) = b.range_cm();
            rng.random_range(lo + 0.5..hi - 0.5)
        }
    }
}

/// Builds the walker's trajectory for an occupied scenario.
///
/// A walk-across goes from `door_start` straight to a crossing point at the
/// sampled clearance and straight on to `door_end`; the crossing point lies
/// near the bisector of the two door bearings so both legs approach it
/// monotonically. A walk-around heads radially to the chosen radius, circles
/// the robot at least once and leaves radially towards `door_end`. Contact
/// paths pause on the bumper for `contact_dwell_s`.
pub fn build_walker_path(
    scenario: ScenarioLabel,
    proximity: ProximityBand,
    door_start: usize,
    door_end: usize,
    config: &SimConfig,
    rng: &mut impl Rng,
) -> Result<WalkerPath, SimError> {
    if door_start == door_end || door_start > 2 || door_end > 2 {
        return Err(SimError::Doors(door_start, door_end));
    }
    let a = config.doors[door_start];
    let b = config.doors[door_end];
    let clearance = sample_clearance(proximity, rng);
    let radius = config.robot_radius_cm + clearance;
    let contact = proximity == ProximityBand::Contact;

    let (builder, closest_time) = match scenario {
        ScenarioLabel::EmptyRoom => return Err(SimError::NoWalker),
        ScenarioLabel::WalkAcross => {
            let bisector = (a.unit() + b.unit()).unit();
            let feasible = |u: Point| a.dot(u) >= radius && b.dot(u) >= radius;
            let mut dir = bisector;
            for _ in 0..8 {
                let jitter = rng.random_range(-config.path_jitter_deg..=config.path_jitter_deg);
                let cand = bisector.rotate_deg(jitter);
                if feasible(cand) {
                    dir = cand;
                    break;
                }
            }
            if !feasible(dir) {
                return Err(SimError::Invalid(format!(
                    "doors {door_start}->{door_end} cannot pass the robot at {radius:.1} cm"
                )));
            }
            let mut p = PathBuilder::start(a);
            p.walk_to(dir * radius, config.walker_speed);
            let tc = p.last().t;
            if contact {
                p.dwell(config.contact_dwell_s);
            }
            p.walk_to(b, config.walker_speed);
            (p, tc)
        }
        ScenarioLabel::WalkAround => {
            // Vertices sit outside the circle so every chord stays at >= radius.
            let vertex_r = radius / (CIRCLE_STEP_DEG.to_radians() / 2.0).cos();
            let start_bearing = a.bearing_deg();
            let end_bearing = b.bearing_deg();
            let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let extra = ((end_bearing - start_bearing) * dir).rem_euclid(360.0);
            let sweep = 360.0 + extra;
            let steps = (sweep / CIRCLE_STEP_DEG).ceil() as usize;
            let mut p = PathBuilder::start(a);
            p.walk_to(Point::from_polar(vertex_r, start_bearing), config.walker_speed);
            let tc = p.last().t;
            if contact {
                p.dwell(config.contact_dwell_s);
            }
            for k in 1..=steps {
                let bearing = start_bearing + dir * sweep * k as f64 / steps as f64;
                p.walk_to(Point::from_polar(vertex_r, bearing), config.circling_speed);
            }
            p.walk_to(b, config.walker_speed);
            (p, tc)
        }
    };

    let mut path = WalkerPath {
        scenario,
        waypoints: builder.points,
        closest_approach_cm: 0.0,
        closest_time,
    };
    path.closest_approach_cm = (path.min_center_distance() - config.robot_radius_cm).max(0.0);
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn pairs() -> Vec<(usize, usize)> {
        (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).collect()
    }

    #[test]
    fn crossing_respects_band() {
        let cfg = SimConfig::default();
        let mut rng = rng_from_seed(1);
        for band in ProximityBand::ALL {
            let (lo, hi) = band.range_cm();
            for (s, e) in pairs() {
                for _ in 0..20 {
                    let p = build_walker_path(ScenarioLabel::WalkAcross, band, s, e, &cfg, &mut rng).unwrap();
                    let c = p.min_center_distance() - cfg.robot_radius_cm;
                    assert!(c >= lo - 1e-9 && c <= hi + 1e-9, "{band:?} clearance {c}");
                    assert!((p.closest_approach_cm - c.max(0.0)).abs() < 1e-9);
                    assert_eq!(p.waypoints.first().unwrap().pos, cfg.doors[s]);
                    assert_eq!(p.waypoints.last().unwrap().pos, cfg.doors[e]);
                }
            }
        }
    }

    #[test]
    fn far_crossing_center_distance() {
        let cfg = SimConfig::default();
        let mut rng = rng_from_seed(2);
        let p = build_walker_path(ScenarioLabel::WalkAcross, ProximityBand::Cm61To80, 0, 1, &cfg, &mut rng).unwrap();
        let clearance = p.min_center_distance() - cfg.robot_radius_cm;
        assert!((61.0..=80.0).contains(&clearance));
    }

    #[test]
    fn circling_winds_full_turn_in_band() {
        let cfg = SimConfig::default();
        let mut rng = rng_from_seed(3);
        for (s, e) in pairs() {
            for _ in 0..10 {
                let p = build_walker_path(ScenarioLabel::WalkAround, ProximityBand::Cm21To40, s, e, &cfg, &mut rng)
                    .unwrap();
                assert!(p.winding_deg().abs() >= 360.0 - 1e-6);
                let c = p.closest_approach_cm;
                assert!((21.0..=40.0).contains(&c), "{c}");
                // The circling part stays inside the band as well.
                let inner: Vec<_> = p.waypoints[1..p.waypoints.len() - 1].iter().collect();
                for w in inner {
                    let cl = w.pos.norm() - cfg.robot_radius_cm;
                    assert!((21.0..=40.0).contains(&cl), "{cl}");
                }
            }
        }
    }

    #[test]
    fn contact_crossing_touches_bumper_and_dwells() {
        let cfg = SimConfig::default();
        let mut rng = rng_from_seed(4);
        let p = build_walker_path(ScenarioLabel::WalkAcross, ProximityBand::Contact, 2, 0, &cfg, &mut rng).unwrap();
        assert_eq!(p.closest_approach_cm, 0.0);
        let at = p.position_at(p.closest_time + cfg.contact_dwell_s / 2.0).unwrap();
        assert!((at.norm() - cfg.robot_radius_cm).abs() <= cfg.contact_reach_cm);
    }

    #[test]
    fn rejects_bad_requests() {
        let cfg = SimConfig::default();
        let mut rng = rng_from_seed(5);
        assert_eq!(
            build_walker_path(ScenarioLabel::EmptyRoom, ProximityBand::Contact, 0, 1, &cfg, &mut rng),
            Err(SimError::NoWalker)
        );
        assert!(build_walker_path(ScenarioLabel::WalkAcross, ProximityBand::Contact, 1, 1, &cfg, &mut rng).is_err());
    }

    #[test]
    fn interpolation_and_rescale() {
        let cfg = SimConfig::default();
        let mut rng = rng_from_seed(6);
        let p = build_walker_path(ScenarioLabel::WalkAround, ProximityBand::Cm1To20, 0, 2, &cfg, &mut rng).unwrap();
        let q = p.rescaled(10.0);
        assert!((q.duration() - 10.0).abs() < 1e-9);
        assert_eq!(q.position_at(-1.0), Some(cfg.doors[0]));
        assert_eq!(q.position_at(11.0), Some(cfg.doors[2]));
        assert!(WalkerPath::empty().position_at(0.0).is_none());
    }
}
