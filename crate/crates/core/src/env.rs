//! Per-robot POMDP wrapper around [`WorldState`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::encoders::{Encoder, EncoderKind, FrameStack};
use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Point2};
use crate::lidar::{raycast_scan, LidarConfig};
use crate::scenarios::ScenarioSpec;
use crate::world::{distance_to_goal, EpisodeStatus, Pose2D, VelocityCommand, WorldState, DEFAULT_DT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub r_arrive: f64,
    pub r_collision: f64,
    pub r_step: f64,
    pub tau: f64,
    pub d_gmin: f64,
    pub max_steps: u64,
    pub dt: f64,
    pub encoder: EncoderKind,
    /// Preset name or `comb1`/`comb2`.
    pub scenario: String,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            r_arrive: 500.0,
            r_collision: -500.0,
            r_step: -5.0,
            tau: 200.0,
            d_gmin: 0.3,
            max_steps: 400,
            dt: DEFAULT_DT,
            encoder: EncoderKind::LogMap,
            scenario: "crowd".into(),
        }
    }
}

impl EnvConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be > 0".into()));
        }
        if !(self.d_gmin > 0.0) {
            return Err(Error::Config("d_gmin must be > 0".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_a: f64,
    pub r_c: f64,
    pub r_d: f64,
    pub r_s: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub maps: FrameStack,
    /// Goal in the body frame: x forward, y left, and its bearing.
    pub rel_goal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub status: EpisodeStatus,
}

pub fn relative_goal(pose: Pose2D, goal: Point2) -> [f64; 3] {
    let local = (goal - pose.position()).rotate(-pose.phi);
    let phi = if local.x == 0.0 && local.y == 0.0 {
        0.0
    } else {
        normalize_angle(local.y.atan2(local.x))
    };
    [local.x, local.y, phi]
}

/// Arrival bonus, collision penalty, progress `τ·(d_prev − d_cur)` and step cost.
pub fn compute_reward(prev_dist: f64, cur_dist: f64, status: EpisodeStatus, cfg: &EnvConfig) -> RewardBreakdown {
    let r_a = if status == EpisodeStatus::Arrived { cfg.r_arrive } else { 0.0 };
    let r_c = if status == EpisodeStatus::Collided { cfg.r_collision } else { 0.0 };
    let r_d = cfg.tau * (prev_dist - cur_dist);
    let r_s = cfg.r_step;
    RewardBreakdown {
        r_a,
        r_c,
        r_d,
        r_s,
        total: r_a + r_c + r_d + r_s,
    }
}

pub struct Env {
    cfg: EnvConfig,
    lidar: LidarConfig,
    encoder: Arc<Encoder>,
    world: Option<WorldState>,
    stacks: Vec<FrameStack>,
    prev_dist: Vec<f64>,
}

impl Env {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let lidar = LidarConfig::default();
        let encoder = Arc::new(Encoder::new(cfg.encoder, lidar)?);
        Ok(Self::with_encoder(cfg, encoder))
    }

    /// Shares a precomputed encoder between environments.
    pub fn with_encoder(cfg: EnvConfig, encoder: Arc<Encoder>) -> Self {
        Self {
            lidar: encoder.lidar,
            cfg,
            encoder,
            world: None,
            stacks: Vec::new(),
            prev_dist: Vec::new(),
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn world(&self) -> Option<&WorldState> {
        self.world.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.world.as_ref().is_none_or(|w| w.active_count() == 0)
    }

    fn observe(&self, world: &WorldState, index: usize) -> Result<crate::encoders::Frame> {
        self.encoder.encode(&raycast_scan(world, index, &self.lidar))
    }

    fn observation(&self, world: &WorldState, index: usize) -> Observation {
        let robot = &world.robots[index];
        Observation {
            maps: self.stacks[index].clone(),
            rel_goal: relative_goal(robot.pose, robot.goal),
        }
    }

    pub fn reset(&mut self, spec: &ScenarioSpec, seed: u64) -> Result<Vec<Observation>> {
        let mut world = spec.generate(seed)?;
        world.dt = self.cfg.dt;
        self.reset_with_world(world)
    }

    /// Starts an episode from a prepared world (scripted tests, replays).
    pub fn reset_with_world(&mut self, mut world: WorldState) -> Result<Vec<Observation>> {
        world.step_index = 0;
        for r in &mut world.robots {
            r.status = EpisodeStatus::Running;
        }
        self.stacks.clear();
        self.prev_dist.clear();
        for i in 0..world.robots.len() {
            self.stacks.push(FrameStack::new(self.observe(&world, i)?));
            self.prev_dist.push(distance_to_goal(&world.robots[i]));
        }
        let obs = (0..world.robots.len()).map(|i| self.observation(&world, i)).collect();
        self.world = Some(world);
        Ok(obs)
    }

    /// Advances all active robots. `cmds` has one entry per robot; entries of
    /// already-terminated robots are ignored and yield `None`.
    pub fn step(&mut self, cmds: &[VelocityCommand]) -> Result<Vec<Option<StepOutcome>>> {
        let mut world = self
            .world
            .take()
            .ok_or_else(|| Error::Usage("step called before reset".into()))?;
        let result = self.step_world(&mut world, cmds);
        self.world = Some(world);
        result
    }

    fn step_world(&mut self, world: &mut WorldState, cmds: &[VelocityCommand]) -> Result<Vec<Option<StepOutcome>>> {
        if world.active_count() == 0 {
            return Err(Error::Usage("episode already terminated; reset first".into()));
        }
        if cmds.len() != world.robots.len() {
            return Err(Error::Config(format!(
                "expected {} commands, got {}",
                world.robots.len(),
                cmds.len()
            )));
        }
        let active: Vec<usize> = (0..world.robots.len()).filter(|&i| world.robots[i].is_active()).collect();
        let active_cmds: Vec<VelocityCommand> = active.iter().map(|&i| cmds[i]).collect();
        world.step(&active_cmds)?;

        let statuses: Vec<EpisodeStatus> = active
            .iter()
            .map(|&i| {
                if distance_to_goal(&world.robots[i]) < self.cfg.d_gmin {
                    EpisodeStatus::Arrived
                } else if world.check_collision(i) {
                    EpisodeStatus::Collided
                } else if world.step_index >= self.cfg.max_steps {
                    EpisodeStatus::Timeout
                } else {
                    EpisodeStatus::Running
                }
            })
            .collect();
        for (&i, &s) in active.iter().zip(&statuses) {
            world.robots[i].status = s;
        }

        let mut out = vec![None; world.robots.len()];
        for (&i, &status) in active.iter().zip(&statuses) {
            let frame = self.observe(world, i)?;
            self.stacks[i].push(frame);
            let cur = distance_to_goal(&world.robots[i]);
            let reward = compute_reward(self.prev_dist[i], cur, status, &self.cfg);
            self.prev_dist[i] = cur;
            out[i] = Some(StepOutcome {
                observation: self.observation(world, i),
                reward,
                status,
            });
        }
        Ok(out)
    }
}
