//! 180° planar laser scanner.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geom::{ray_circle, ray_segment, Point2};
use crate::world::{Obstacle, WorldState};

pub const DEFAULT_BEAMS: usize = 960;
pub const DEFAULT_MAX_RANGE: f64 = 6.0;
pub const MIN_RANGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarConfig {
    pub n_beams: usize,
    pub max_range: f64,
    pub fov: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            n_beams: DEFAULT_BEAMS,
            max_range: DEFAULT_MAX_RANGE,
            fov: PI,
        }
    }
}

impl LidarConfig {
    /// Beam angle relative to the robot heading. Beam 0 points right, the last
    /// beam points left.
    pub fn beam_angle(&self, j: usize) -> f64 {
        if self.n_beams == 1 {
            return 0.0;
        }
        -self.fov / 2.0 + j as f64 * self.fov / (self.n_beams - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub ranges: Vec<f64>,
    pub max_range: f64,
    pub fov: f64,
}

impl Scan {
    /// Builds a scan from raw ranges, clamping each into `[MIN_RANGE, max_range]`.
    pub fn from_ranges(ranges: Vec<f64>, max_range: f64, fov: f64) -> Self {
        let ranges = ranges
            .into_iter()
            .map(|r| if r.is_nan() { max_range } else { r.clamp(MIN_RANGE, max_range) })
            .collect();
        Self {
            ranges,
            max_range,
            fov,
        }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

fn obstacle_hit(o: &Obstacle, origin: Point2, dir: Point2) -> Option<f64> {
    match o {
        Obstacle::Circle { center, radius } => ray_circle(origin, dir, *center, *radius),
        Obstacle::Polygon { vertices } => {
            let n = vertices.len();
            (0..n)
                .filter_map(|i| ray_segment(origin, dir, vertices[i], vertices[(i + 1) % n]))
                .reduce(f64::min)
        }
    }
}

/// Range along a single world-frame ray from `origin`, ignoring robot `skip`.
pub fn cast_ray(world: &WorldState, skip: usize, origin: Point2, angle: f64, max_range: f64) -> f64 {
    let dir = Point2::from_polar(1.0, angle);
    let mut best = max_range;
    for o in &world.obstacles {
        if let Some(t) = obstacle_hit(o, origin, dir) {
            best = best.min(t);
        }
    }
    for (i, r) in world.robots.iter().enumerate() {
        if i == skip || !r.is_active() {
            continue;
        }
        if let Some(t) = ray_circle(origin, dir, r.pose.position(), r.radius) {
            best = best.min(t);
        }
    }
    if let Some(b) = world.bounds {
        let c = b.corners();
        for i in 0..4 {
            if let Some(t) = ray_segment(origin, dir, c[i], c[(i + 1) % 4]) {
                best = best.min(t);
            }
        }
    }
    best
}

/// Scan observed by robot `index` from its center.
pub fn raycast_scan(world: &WorldState, index: usize, cfg: &LidarConfig) -> Scan {
    let robot = &world.robots[index];
    let origin = robot.pose.position();
    let ranges = (0..cfg.n_beams)
        .map(|j| cast_ray(world, index, origin, robot.pose.phi + cfg.beam_angle(j), cfg.max_range))
        .collect();
    Scan::from_ranges(ranges, cfg.max_range, cfg.fov)
}
