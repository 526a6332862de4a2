//! PPO training, evaluation and artifact tooling for the log-map navigation
//! policy.

pub mod agent;
pub mod config;
pub mod error;
pub mod eval;
pub mod gae;
pub mod ppo;
pub mod render;
pub mod rollout;
pub mod scanio;
pub mod seeds;
pub mod trainer;
pub mod trajlog;

pub use agent::{load_checkpoint, save_checkpoint, Agent, CheckpointMeta};
pub use config::{ScenarioSource, TrainConfig};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport};
pub use trainer::{EpochMetrics, TrainSummary, Trainer};
pub use trajlog::TrajectoryLog;
