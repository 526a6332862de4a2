//! Deterministic 2D world: unicycle robots, static obstacles and collision tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, point_segment_distance, Point2, Rect};

pub const V_MAX: f64 = 0.6;
pub const OMEGA_MAX: f64 = 0.9;
pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.17;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: normalize_angle(phi),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Bounded unicycle command. Out-of-range inputs are clamped on construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    v: f64,
    omega: f64,
}

impl VelocityCommand {
    pub fn new(v: f64, omega: f64) -> Self {
        let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, V_MAX) };
        let omega = if omega.is_nan() {
            0.0
        } else {
            omega.clamp(-OMEGA_MAX, OMEGA_MAX)
        };
        Self { v, omega }
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Euler step of the unicycle model.
pub fn step_kinematics(pose: Pose2D, cmd: VelocityCommand, dt: f64) -> Pose2D {
    let (s, c) = pose.phi.sin_cos();
    Pose2D {
        x: pose.x + cmd.v * c * dt,
        y: pose.y + cmd.v * s * dt,
        phi: normalize_angle(pose.phi + cmd.omega * dt),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Obstacle {
    Circle { center: Point2, radius: f64 },
    /// Strictly convex, counter-clockwise vertices.
    Polygon { vertices: Vec<Point2> },
}

impl Obstacle {
    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Geometry(format!("circle radius must be > 0, got {radius}")));
        }
        Ok(Self::Circle { center, radius })
    }

    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Geometry(format!("polygon needs >= 3 vertices, got {n}")));
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::Geometry(
                    "polygon must be strictly convex and counter-clockwise".into(),
                ));
            }
        }
        // a strictly left-turning loop may still wind twice; reject total turning != 2π
        let mut winding = 0.0;
        for i in 0..n {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            winding += e0.cross(e1).atan2(e0.dot(e1));
        }
        if (winding - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
            return Err(Error::Geometry("polygon winds more than once".into()));
        }
        Ok(Self::Polygon { vertices })
    }

    pub fn rect(r: Rect) -> Result<Self> {
        Self::polygon(r.corners().to_vec())
    }

    /// Signed distance from `p` to the obstacle surface (negative inside).
    pub fn signed_distance(&self, p: Point2) -> f64 {
        match self {
            Obstacle::Circle { center, radius } => p.distance(*center) - radius,
            Obstacle::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = true;
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (b - a).cross(p - a) <= 0.0 {
                        inside = false;
                    }
                    best = best.min(point_segment_distance(p, a, b));
                }
                if inside {
                    -best
                } else {
                    best
                }
            }
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.signed_distance(p) < 0.0
    }

    /// Center and radius of a circle enclosing the shape (vertex centroid for polygons).
    pub fn bounding_center_radius(&self) -> (Point2, f64) {
        match self {
            Obstacle::Circle { center, radius } => (*center, *radius),
            Obstacle::Polygon { vertices } => {
                let n = vertices.len() as f64;
                let c = vertices.iter().fold(Point2::default(), |acc, v| acc + *v) * (1.0 / n);
                let r = vertices.iter().map(|v| v.distance(c)).fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    pub fn transformed(&self, rotation: f64, translation: Point2) -> Self {
        match self {
            Obstacle::Circle { center, radius } => Obstacle::Circle {
                center: center.rotate(rotation) + translation,
                radius: *radius,
            },
            Obstacle::Polygon { vertices } => Obstacle::Polygon {
                vertices: vertices
                    .iter()
                    .map(|v| v.rotate(rotation) + translation)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    #[default]
    Running,
    Arrived,
    Collided,
    Timeout,
}

impl EpisodeStatus {
    pub fn is_terminal(self) -> bool {
        self != EpisodeStatus::Running
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Robot {
    pub id: u32,
    pub pose: Pose2D,
    pub radius: f64,
    pub goal: Point2,
    pub status: EpisodeStatus,
}

impl Robot {
    pub fn new(id: u32, pose: Pose2D, goal: Point2) -> Self {
        Self {
            id,
            pose,
            radius: DEFAULT_ROBOT_RADIUS,
            goal,
            status: EpisodeStatus::Running,
        }
    }

    pub fn is_active(&self) -> bool {
        !self.status.is_terminal()
    }
}

pub fn distance_to_goal(robot: &Robot) -> f64 {
    robot.pose.position().distance(robot.goal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub robots: Vec<Robot>,
    pub obstacles: Vec<Obstacle>,
    /// `None` only for unbounded test worlds.
    pub bounds: Option<Rect>,
    pub dt: f64,
    pub step_index: u64,
}

impl WorldState {
    pub fn new(robots: Vec<Robot>, obstacles: Vec<Obstacle>, bounds: Option<Rect>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {dt}")));
        }
        for (i, r) in robots.iter().enumerate() {
            if !(r.radius > 0.0) {
                return Err(Error::Config(format!("robot {} has non-positive radius", r.id)));
            }
            if robots[..i].iter().any(|o| o.id == r.id) {
                return Err(Error::Config(format!("duplicate robot id {}", r.id)));
            }
            if let Some(b) = bounds {
                if !b.contains(r.pose.position()) {
                    return Err(Error::Config(format!("robot {} starts outside bounds", r.id)));
                }
            }
        }
        Ok(Self {
            robots,
            obstacles,
            bounds,
            dt,
            step_index: 0,
        })
    }

    pub fn active_count(&self) -> usize {
        self.robots.iter().filter(|r| r.is_active()).count()
    }

    /// Advances every active robot by one control period.
    ///
    /// `cmds` holds one command per active robot, in robot order. Terminated
    /// robots stay frozen.
    pub fn step(&mut self, cmds: &[VelocityCommand]) -> Result<()> {
        let active = self.active_count();
        if cmds.len() != active {
            return Err(Error::Config(format!(
                "expected {active} commands (one per active robot), got {}",
                cmds.len()
            )));
        }
        let dt = self.dt;
        let mut it = cmds.iter();
        for robot in self.robots.iter_mut().filter(|r| r.is_active()) {
            // each update reads only the robot's own pre-step pose
            let cmd = it.next().expect("count checked");
            robot.pose = step_kinematics(robot.pose, *cmd, dt);
        }
        self.step_index += 1;
        Ok(())
    }

    /// Collision predicate for robot at `index` against obstacles, bounds and
    /// other active robots.
    pub fn check_collision(&self, index: usize) -> bool {
        let robot = &self.robots[index];
        let p = robot.pose.position();
        if self
            .obstacles
            .iter()
            .any(|o| o.signed_distance(p) < robot.radius)
        {
            return true;
        }
        if let Some(b) = self.bounds {
            let inner = b.inset(robot.radius);
            if p.x < inner.min.x || p.x > inner.max.x || p.y < inner.min.y || p.y > inner.max.y {
                return true;
            }
        }
        self.robots.iter().enumerate().any(|(j, other)| {
            j != index && other.is_active() && p.distance(other.pose.position()) < robot.radius + other.radius
        })
    }

    /// Rigidly transforms robots, goals and obstacles. Bounds are left as-is,
    /// so rotate only unbounded worlds.
    pub fn transformed(&self, rotation: f64, translation: Point2) -> Self {
        let mut out = self.clone();
        for r in &mut out.robots {
            let p = r.pose.position().rotate(rotation) + translation;
            r.pose = Pose2D::new(p.x, p.y, r.pose.phi + rotation);
            r.goal = r.goal.rotate(rotation) + translation;
        }
        out.obstacles = self
            .obstacles
            .iter()
            .map(|o| o.transformed(rotation, translation))
            .collect();
        out
    }
}
