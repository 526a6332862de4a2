//! Seeded scenario generators, training combinations and the goal-distance curriculum.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use crate::world::{Obstacle, Pose2D, Robot, WorldState, DEFAULT_DT, DEFAULT_ROBOT_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Crowd,
    Circle,
    Narrow,
    Cross,
    Corridor,
}

/// Family-specific geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Layout {
    /// Robots, goals and obstacles uniform in one rectangle.
    Crowd { region: Rect },
    /// Robots evenly spaced on a circle of radius drawn from `radius`, goals antipodal.
    Circle { radius: (f64, f64) },
    /// Two open regions separated by a wall with a single channel.
    Narrow {
        half_width: f64,
        half_height: f64,
        channel_length: f64,
        channel_width: (f64, f64),
        /// Maximum |y| of the channel centre.
        channel_offset: f64,
        /// Half-size of the square around the channel where obstacles are dropped.
        obstacle_zone: f64,
    },
    /// Two orthogonal groups whose straight paths cross near the centre.
    Cross {
        half_extent: f64,
        path_half_length: (f64, f64),
        lane_spacing: f64,
        jitter: f64,
        /// Shift of the second group along x; large values separate the groups.
        offset: f64,
    },
    /// Two groups swapping sides through a corridor.
    Corridor {
        half_width: f64,
        half_height: f64,
        corridor_length: f64,
        corridor_width: (f64, f64),
    },
}

impl Layout {
    pub fn family(&self) -> Family {
        match self {
            Layout::Crowd { .. } => Family::Crowd,
            Layout::Circle { .. } => Family::Circle,
            Layout::Narrow { .. } => Family::Narrow,
            Layout::Cross { .. } => Family::Cross,
            Layout::Corridor { .. } => Family::Corridor,
        }
    }
}

fn default_radius() -> f64 {
    DEFAULT_ROBOT_RADIUS
}
fn default_circle_obstacle() -> (f64, f64) {
    (0.2, 0.6)
}
fn default_polygon_obstacle() -> (f64, f64) {
    (0.3, 0.8)
}
fn default_polygon_fraction() -> f64 {
    0.5
}
fn default_heading_noise() -> f64 {
    PI / 4.0
}
fn default_clearance() -> f64 {
    0.1
}
fn default_attempts() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub layout: Layout,
    pub n_robots: usize,
    pub n_obstacles: usize,
    #[serde(default = "default_radius")]
    pub robot_radius: f64,
    #[serde(default = "default_circle_obstacle")]
    pub obstacle_circle_radius: (f64, f64),
    #[serde(default = "default_polygon_obstacle")]
    pub obstacle_polygon_radius: (f64, f64),
    #[serde(default = "default_polygon_fraction")]
    pub polygon_fraction: f64,
    /// Start–goal distance range; `None` leaves goals unconstrained.
    #[serde(default)]
    pub goal_distance: Option<(f64, f64)>,
    /// Initial heading is the bearing to the goal plus U(−noise, noise).
    #[serde(default = "default_heading_noise")]
    pub heading_noise: f64,
    /// Extra margin on top of the radius-based clearances.
    #[serde(default = "default_clearance")]
    pub clearance: f64,
    #[serde(default)]
    pub curriculum_stage: u32,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

impl ScenarioSpec {
    pub fn new(layout: Layout, n_robots: usize, n_obstacles: usize) -> Self {
        Self {
            layout,
            n_robots,
            n_obstacles,
            robot_radius: default_radius(),
            obstacle_circle_radius: default_circle_obstacle(),
            obstacle_polygon_radius: default_polygon_obstacle(),
            polygon_fraction: default_polygon_fraction(),
            goal_distance: None,
            heading_noise: default_heading_noise(),
            clearance: default_clearance(),
            curriculum_stage: 0,
            max_attempts: default_attempts(),
        }
    }

    pub fn family(&self) -> Family {
        self.layout.family()
    }

    pub fn crowd(n_robots: usize, n_obstacles: usize, half_size: f64) -> Self {
        Self::new(
            Layout::Crowd {
                region: Rect::centered(half_size, half_size),
            },
            n_robots,
            n_obstacles,
        )
    }

    pub fn circle(n_robots: usize, n_obstacles: usize, radius: (f64, f64)) -> Self {
        Self::new(Layout::Circle { radius }, n_robots, n_obstacles)
    }

    pub fn narrow(n_robots: usize, n_obstacles: usize) -> Self {
        Self::new(
            Layout::Narrow {
                half_width: 6.0,
                half_height: 4.0,
                channel_length: 1.0,
                channel_width: (1.0, 1.6),
                channel_offset: 1.0,
                obstacle_zone: 1.5,
            },
            n_robots,
            n_obstacles,
        )
    }

    pub fn cross(n_robots: usize, n_obstacles: usize) -> Self {
        Self::new(
            Layout::Cross {
                half_extent: 7.0,
                path_half_length: (4.0, 5.0),
                lane_spacing: 0.8,
                jitter: 0.15,
                offset: 0.0,
            },
            n_robots,
            n_obstacles,
        )
    }

    pub fn corridor(n_robots: usize, n_obstacles: usize) -> Self {
        Self::new(
            Layout::Corridor {
                half_width: 8.0,
                half_height: 4.0,
                corridor_length: 4.0,
                corridor_width: (1.0, 1.6),
            },
            n_robots,
            n_obstacles,
        )
    }

    /// Named configurations used by the CLI and config files.
    pub fn preset(name: &str) -> Result<Self> {
        Ok(match name {
            "crowd" => Self::crowd(6, 16, 5.0),
            "circle1" => Self::circle(15, 8, (5.0, 7.0)),
            "circle2" => Self::circle(20, 16, (4.0, 6.0)),
            "narrow" => Self::narrow(6, 3),
            "cross" => Self::cross(8, 0),
            "corridor" => Self::corridor(6, 0),
            "desk_crowd" => Self::crowd(1, 4, 4.0),
            "desk_narrow" => {
                let mut s = Self::narrow(1, 2);
                if let Layout::Narrow {
                    half_width,
                    half_height,
                    ..
                } = &mut s.layout
                {
                    *half_width = 4.5;
                    *half_height = 3.0;
                }
                s
            }
            other => return Err(Error::Config(format!("unknown scenario '{other}'"))),
        })
    }

    pub const PRESETS: [&'static str; 8] = [
        "crowd",
        "circle1",
        "circle2",
        "narrow",
        "cross",
        "corridor",
        "desk_crowd",
        "desk_narrow",
    ];

    pub fn generate(&self, seed: u64) -> Result<WorldState> {
        generate(self, seed)
    }
}

/// Training mixture: two families alternating across parallel environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comb {
    Comb1,
    Comb2,
}

impl Comb {
    pub fn families(self) -> [Family; 2] {
        match self {
            Comb::Comb1 => [Family::Crowd, Family::Circle],
            Comb::Comb2 => [Family::Crowd, Family::Narrow],
        }
    }

    /// Constituent training specs; counts mirror the test configurations.
    pub fn specs(self) -> [ScenarioSpec; 2] {
        match self {
            Comb::Comb1 => [Self::preset("crowd"), Self::preset("circle1")],
            Comb::Comb2 => [Self::preset("crowd"), Self::preset("narrow")],
        }
    }

    fn preset(name: &str) -> ScenarioSpec {
        ScenarioSpec::preset(name).expect("built-in preset")
    }

    /// Spec for parallel environment `env_index`: even indices get the first
    /// family, odd the second, so any even worker count splits in half.
    pub fn spec_for_env(self, env_index: usize) -> ScenarioSpec {
        let [a, b] = self.specs();
        if env_index.is_multiple_of(2) {
            a
        } else {
            b
        }
    }
}

/// Goal-distance range for the two-stage curriculum. Only Comb2 uses it.
pub fn curriculum_goal_range(comb: Option<Comb>, epoch: usize, boundary: usize) -> Option<(u32, (f64, f64))> {
    match comb {
        Some(Comb::Comb2) if epoch < boundary => Some((1, (1.0, 4.0))),
        Some(Comb::Comb2) => Some((2, (4.0, 10.0))),
        _ => None,
    }
}

/// Applies the curriculum to a spec in place (identity outside Comb2).
pub fn apply_curriculum(spec: &mut ScenarioSpec, comb: Option<Comb>, epoch: usize, boundary: usize) {
    if let Some((stage, range)) = curriculum_goal_range(comb, epoch, boundary) {
        if matches!(spec.family(), Family::Crowd | Family::Narrow) {
            spec.goal_distance = Some(range);
        }
        spec.curriculum_stage = stage;
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, r: Rect) -> Point2 {
    Point2::new(uniform(rng, (r.min.x, r.max.x)), uniform(rng, (r.min.y, r.max.y)))
}

const ITEM_TRIES: usize = 200;

struct Builder<'a> {
    spec: &'a ScenarioSpec,
    rng: ChaCha8Rng,
    bounds: Rect,
    obstacles: Vec<Obstacle>,
    starts: Vec<Point2>,
    goals: Vec<Point2>,
}

impl<'a> Builder<'a> {
    fn random_obstacle(&mut self, center: Point2) -> Obstacle {
        if self.rng.random_bool(self.spec.polygon_fraction.clamp(0.0, 1.0)) {
            let r = uniform(&mut self.rng, self.spec.obstacle_polygon_radius);
            let k = self.rng.random_range(3..=6);
            // sorted angles with a minimum gap keep the polygon strictly convex
            loop {
                let mut a: Vec<f64> = (0..k).map(|_| self.rng.random_range(0.0..2.0 * PI)).collect();
                a.sort_by(f64::total_cmp);
                let min_gap = (0..k)
                    .map(|i| if i + 1 < k { a[i + 1] - a[i] } else { a[0] + 2.0 * PI - a[i] })
                    .fold(f64::INFINITY, f64::min);
                let max_gap = (0..k)
                    .map(|i| if i + 1 < k { a[i + 1] - a[i] } else { a[0] + 2.0 * PI - a[i] })
                    .fold(0.0, f64::max);
                if min_gap > 0.3 && max_gap < PI - 0.1 {
                    let verts = a.iter().map(|&t| center + Point2::from_polar(r, t)).collect();
                    return Obstacle::polygon(verts).expect("points on a circle in angular order");
                }
            }
        } else {
            let r = uniform(&mut self.rng, self.spec.obstacle_circle_radius);
            Obstacle::circle(center, r).expect("positive radius")
        }
    }

    fn clear_of_obstacles(&self, p: Point2) -> bool {
        let need = self.spec.robot_radius + self.spec.clearance;
        self.obstacles.iter().all(|o| o.signed_distance(p) >= need)
    }

    fn in_bounds(&self, p: Point2) -> bool {
        self.bounds.inset(self.spec.robot_radius + self.spec.clearance).contains(p)
    }

    fn clear_of(&self, p: Point2, others: &[Point2]) -> bool {
        let need = 2.0 * self.spec.robot_radius + self.spec.clearance;
        others.iter().all(|q| q.distance(p) >= need)
    }

    fn start_ok(&self, p: Point2) -> bool {
        self.in_bounds(p) && self.clear_of_obstacles(p) && self.clear_of(p, &self.starts)
    }

    fn goal_ok(&self, p: Point2) -> bool {
        self.in_bounds(p) && self.clear_of_obstacles(p) && self.clear_of(p, &self.goals)
    }

    /// Drops `n` obstacles with centres uniform in `zone`, away from placed starts/goals.
    fn scatter_obstacles(&mut self, n: usize, zone: Rect) -> Option<()> {
        for _ in 0..n {
            let mut placed = false;
            for _ in 0..ITEM_TRIES {
                let c = uniform_in(&mut self.rng, zone);
                let o = self.random_obstacle(c);
                let need = self.spec.robot_radius + self.spec.clearance;
                if self
                    .starts
                    .iter()
                    .chain(&self.goals)
                    .all(|&p| o.signed_distance(p) >= need)
                {
                    self.obstacles.push(o);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return None;
            }
        }
        Some(())
    }

    /// Samples a start in `start_zone` and a goal in `goal_zone`, honouring
    /// the spec's goal-distance range when set.
    fn place_pair(&mut self, start_zone: Rect, goal_zone: Rect) -> Option<()> {
        for _ in 0..ITEM_TRIES {
            let s = uniform_in(&mut self.rng, start_zone);
            if !self.start_ok(s) {
                continue;
            }
            let g = match self.spec.goal_distance {
                Some(range) => {
                    let d = uniform(&mut self.rng, range);
                    let a = self.rng.random_range(-PI..PI);
                    s + Point2::from_polar(d, a)
                }
                None => uniform_in(&mut self.rng, goal_zone),
            };
            if goal_zone.contains(g) && self.goal_ok(g) && g.distance(s) > self.spec.robot_radius {
                self.starts.push(s);
                self.goals.push(g);
                return Some(());
            }
        }
        None
    }

    fn finish(mut self) -> Option<WorldState> {
        let radius = self.spec.robot_radius;
        let grid = FreeGrid::new(&self.obstacles, self.bounds, radius, 0.1);
        for (s, g) in self.starts.iter().zip(&self.goals) {
            if !grid.connected(*s, *g) {
                return None;
            }
        }
        let robots = self
            .starts
            .iter()
            .zip(&self.goals)
            .enumerate()
            .map(|(i, (&s, &g))| {
                let bearing = (g.y - s.y).atan2(g.x - s.x);
                let noise = self.spec.heading_noise;
                let phi = if noise > 0.0 {
                    bearing + self.rng.random_range(-noise..noise)
                } else {
                    bearing
                };
                let mut r = Robot::new(i as u32, Pose2D::new(s.x, s.y, phi), g);
                r.radius = radius;
                r
            })
            .collect();
        let world = WorldState::new(robots, self.obstacles, Some(self.bounds), DEFAULT_DT).ok()?;
        (0..world.robots.len())
            .all(|i| !world.check_collision(i))
            .then_some(world)
    }
}

/// Occupancy raster of the configuration space for a disc robot.
struct FreeGrid {
    origin: Point2,
    cell: f64,
    cols: usize,
    rows: usize,
    free: Vec<bool>,
}

impl FreeGrid {
    fn new(obstacles: &[Obstacle], bounds: Rect, radius: f64, cell: f64) -> Self {
        let cols = (bounds.width() / cell).ceil() as usize;
        let rows = (bounds.height() / cell).ceil() as usize;
        let inner = bounds.inset(radius);
        let mut free = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let p = Point2::new(
                    bounds.min.x + (c as f64 + 0.5) * cell,
                    bounds.min.y + (r as f64 + 0.5) * cell,
                );
                free.push(inner.contains(p) && obstacles.iter().all(|o| o.signed_distance(p) >= radius));
            }
        }
        Self {
            origin: bounds.min,
            cell,
            cols,
            rows,
            free,
        }
    }

    fn cell_of(&self, p: Point2) -> Option<usize> {
        let c = ((p.x - self.origin.x) / self.cell).floor();
        let r = ((p.y - self.origin.y) / self.cell).floor();
        (c >= 0.0 && r >= 0.0 && (c as usize) < self.cols && (r as usize) < self.rows)
            .then(|| r as usize * self.cols + c as usize)
    }

    /// Nearest free cell to `p` within one cell, since the start itself may
    /// straddle a cell whose centre is blocked.
    fn free_cell_near(&self, p: Point2) -> Option<usize> {
        let mut best = None;
        for dy in [-1.0, 0.0, 1.0] {
            for dx in [-1.0, 0.0, 1.0] {
                let q = Point2::new(p.x + dx * self.cell, p.y + dy * self.cell);
                if let Some(i) = self.cell_of(q).filter(|&i| self.free[i]) {
                    let d = (dx * dx + dy * dy) as i32;
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, i));
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }

    fn connected(&self, a: Point2, b: Point2) -> bool {
        let (Some(start), Some(goal)) = (self.free_cell_near(a), self.free_cell_near(b)) else {
            return false;
        };
        let mut seen = vec![false; self.free.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            if i == goal {
                return true;
            }
            let (r, c) = (i / self.cols, i % self.cols);
            let mut visit = |j: usize| {
                if self.free[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if r > 0 {
                visit(i - self.cols);
            }
            if r + 1 < self.rows {
                visit(i + self.cols);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < self.cols {
                visit(i + 1);
            }
        }
        false
    }
}

fn try_layout(spec: &ScenarioSpec, rng: ChaCha8Rng) -> Option<WorldState> {
    let margin = spec.robot_radius + spec.clearance;
    match &spec.layout {
        Layout::Crowd { region } => {
            let mut b = Builder {
                spec,
                rng,
                bounds: *region,
                obstacles: vec![],
                starts: vec![],
                goals: vec![],
            };
            b.scatter_obstacles(spec.n_obstacles, *region)?;
            let zone = region.inset(margin);
            for _ in 0..spec.n_robots {
                b.place_pair(zone, zone)?;
            }
            b.finish()
        }
        Layout::Circle { radius } => {
            let mut rng = rng;
            let r = uniform(&mut rng, *radius);
            let bounds = Rect::centered(r + 1.5, r + 1.5);
            let offset = rng.random_range(0.0..2.0 * PI);
            let n = spec.n_robots.max(1);
            let mut b = Builder {
                spec,
                rng,
                bounds,
                obstacles: vec![],
                starts: vec![],
                goals: vec![],
            };
            for i in 0..spec.n_robots {
                let s = Point2::from_polar(r, offset + 2.0 * PI * i as f64 / n as f64);
                b.starts.push(s);
                b.goals.push(-s);
            }
            let inner = (0.7 * r) / std::f64::consts::SQRT_2;
            b.scatter_obstacles(spec.n_obstacles, Rect::centered(inner, inner))?;
            b.finish()
        }
        Layout::Narrow {
            half_width,
            half_height,
            channel_length,
            channel_width,
            channel_offset,
            obstacle_zone,
        } => {
            let mut rng = rng;
            let bounds = Rect::centered(*half_width, *half_height);
            let w = uniform(&mut rng, *channel_width);
            let cy = uniform(&mut rng, (-channel_offset, *channel_offset));
            let hl = channel_length / 2.0;
            let mut b = Builder {
                spec,
                rng,
                bounds,
                obstacles: walls_with_gap(bounds, hl, cy, w),
                starts: vec![],
                goals: vec![],
            };
            let zone = Rect::new(-hl - obstacle_zone, cy - obstacle_zone, hl + obstacle_zone, cy + obstacle_zone);
            b.scatter_obstacles(spec.n_obstacles, zone)?;
            let left = Rect::new(-half_width + margin, -half_height + margin, -hl - margin, half_height - margin);
            let right = Rect::new(hl + margin, -half_height + margin, half_width - margin, half_height - margin);
            for _ in 0..spec.n_robots {
                let (s, g) = if b.rng.random_bool(0.5) { (left, right) } else { (right, left) };
                b.place_pair(s, g)?;
            }
            b.finish()
        }
        Layout::Cross {
            half_extent,
            path_half_length,
            lane_spacing,
            jitter,
            offset,
        } => {
            let mut rng = rng;
            let bounds = Rect::centered(*half_extent, *half_extent);
            let n_a = spec.n_robots.div_ceil(2);
            let n_b = spec.n_robots / 2;
            let mut starts = Vec::new();
            let mut goals = Vec::new();
            let jit = |rng: &mut ChaCha8Rng| if *jitter > 0.0 { rng.random_range(-jitter..*jitter) } else { 0.0 };
            for (n, vertical) in [(n_a, false), (n_b, true)] {
                for i in 0..n {
                    let lane = (i as f64 - (n as f64 - 1.0) / 2.0) * lane_spacing;
                    let s_len = uniform(&mut rng, *path_half_length);
                    let g_len = uniform(&mut rng, *path_half_length);
                    let (s, g) = if vertical {
                        let x = offset + lane;
                        (Point2::new(x + jit(&mut rng), -s_len), Point2::new(x + jit(&mut rng), g_len))
                    } else {
                        (Point2::new(-s_len, lane + jit(&mut rng)), Point2::new(g_len, lane + jit(&mut rng)))
                    };
                    starts.push(s);
                    goals.push(g);
                }
            }
            let mut b = Builder {
                spec,
                rng,
                bounds,
                obstacles: vec![],
                starts,
                goals,
            };
            if !b.starts.iter().enumerate().all(|(i, &s)| b.in_bounds(s) && b.clear_of(s, &b.starts[..i])) {
                return None;
            }
            let inner = half_extent - 2.0;
            b.scatter_obstacles(spec.n_obstacles, Rect::centered(inner, inner))?;
            b.finish()
        }
        Layout::Corridor {
            half_width,
            half_height,
            corridor_length,
            corridor_width,
        } => {
            let mut rng = rng;
            let bounds = Rect::centered(*half_width, *half_height);
            let w = uniform(&mut rng, *corridor_width);
            let hl = corridor_length / 2.0;
            let mut b = Builder {
                spec,
                rng,
                bounds,
                obstacles: walls_with_gap(bounds, hl, 0.0, w),
                starts: vec![],
                goals: vec![],
            };
            let left = Rect::new(-half_width + margin, -half_height + margin, -hl - 1.0, half_height - margin);
            let n_a = spec.n_robots.div_ceil(2);
            let n_b = spec.n_robots / 2;
            let mut a_starts = Vec::new();
            for _ in 0..n_a {
                let mut ok = false;
                for _ in 0..ITEM_TRIES {
                    let s = uniform_in(&mut b.rng, left);
                    if b.start_ok(s) && b.clear_of(s, &a_starts) {
                        a_starts.push(s);
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return None;
                }
            }
            // group B mirrors group A; the groups exchange positions
            let b_starts: Vec<Point2> = a_starts.iter().take(n_b).map(|p| Point2::new(-p.x, p.y)).collect();
            for (i, &s) in a_starts.iter().enumerate() {
                b.starts.push(s);
                b.goals.push(b_starts.get(i).copied().unwrap_or(Point2::new(-s.x, s.y)));
            }
            for (i, &s) in b_starts.iter().enumerate() {
                b.starts.push(s);
                b.goals.push(a_starts[i]);
            }
            let zone = Rect::new(-half_width + 1.0, -half_height + 1.0, half_width - 1.0, half_height - 1.0);
            b.scatter_obstacles(spec.n_obstacles, zone)?;
            b.finish()
        }
    }
}

/// Two wall blocks filling `x ∈ [−hl, hl]` except a gap of width `w` centred at `cy`.
fn walls_with_gap(bounds: Rect, hl: f64, cy: f64, w: f64) -> Vec<Obstacle> {
    let mut walls = Vec::new();
    let top = Rect::new(-hl, cy + w / 2.0, hl, bounds.max.y);
    let bottom = Rect::new(-hl, bounds.min.y, hl, cy - w / 2.0);
    for r in [top, bottom] {
        if !r.is_empty() {
            walls.push(Obstacle::rect(r).expect("non-empty rectangle"));
        }
    }
    walls
}

/// Generates a collision-free world for `spec`, deterministic in `seed`.
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<WorldState> {
    if spec.robot_radius <= 0.0 {
        return Err(Error::Config("robot radius must be > 0".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..spec.max_attempts {
        let rng = ChaCha8Rng::seed_from_u64(master.random());
        if let Some(w) = try_layout(spec, rng) {
            return Ok(w);
        }
    }
    Err(Error::Scenario(format!(
        "{:?} layout could not be placed after {} attempts",
        spec.family(),
        spec.max_attempts
    )))
}

pub fn gen_crowd(spec: &ScenarioSpec, seed: u64) -> Result<WorldState> {
    expect_family(spec, Family::Crowd)?;
    generate(spec, seed)
}

pub fn gen_circle(spec: &ScenarioSpec, seed: u64) -> Result<WorldState> {
    expect_family(spec, Family::Circle)?;
    generate(spec, seed)
}

pub fn gen_narrow(spec: &ScenarioSpec, seed: u64) -> Result<WorldState> {
    expect_family(spec, Family::Narrow)?;
    generate(spec, seed)
}

pub fn gen_cross(spec: &ScenarioSpec, seed: u64) -> Result<WorldState> {
    expect_family(spec, Family::Cross)?;
    generate(spec, seed)
}

pub fn gen_corridor(spec: &ScenarioSpec, seed: u64) -> Result<WorldState> {
    expect_family(spec, Family::Corridor)?;
    generate(spec, seed)
}

fn expect_family(spec: &ScenarioSpec, family: Family) -> Result<()> {
    if spec.family() == family {
        Ok(())
    } else {
        Err(Error::Config(format!("expected a {family:?} spec, got {:?}", spec.family())))
    }
}
