//! Simulation side of the log-map navigation stack: a deterministic 2D
//! multi-robot world, a 180° ray-cast lidar, scan encoders and the
//! per-robot POMDP environment with its scenario generators.

pub mod encoders;
pub mod env;
pub mod error;
pub mod geom;
pub mod lidar;
pub mod scenarios;
pub mod world;

pub use encoders::{Encoder, EncoderKind, Frame, FrameStack, LogMap, RingTable};
pub use env::{Env, EnvConfig, Observation, RewardBreakdown, StepOutcome};
pub use error::{Error, Result};
pub use geom::{Point2, Rect};
pub use lidar::{LidarConfig, Scan};
pub use scenarios::{Comb, Family, Layout, ScenarioSpec};
pub use world::{EpisodeStatus, Obstacle, Pose2D, Robot, VelocityCommand, WorldState};
