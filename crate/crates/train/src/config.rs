//! Training configuration, loaded from TOML.
//!
//! ```toml
//! schema = 1
//! seed = 7
//! epochs = 300
//! [env]
//! encoder = "logmap"
//! scenario = "desk_crowd"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use lognav_core::scenarios::{apply_curriculum, Comb};
use lognav_core::{EnvConfig, ScenarioSpec};
use lognav_nn::checkpoint::sha256_hex;
use lognav_nn::NetSpec;

use crate::error::{io_err, Error, Result};

pub const CONFIG_SCHEMA: u32 = 1;

/// Body overrides; the defaults give the full-size network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub conv_channels: Vec<usize>,
    pub hidden: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            conv_channels: vec![32, 64, 64],
            hidden: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub schema: u32,
    pub seed: u64,
    pub lr_policy: f64,
    pub lr_value: f64,
    pub gamma: f64,
    pub steps_per_epoch: usize,
    pub clip_ratio: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub n_parallel_envs: usize,
    pub update_epochs: usize,
    pub minibatch_size: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    /// Global gradient-norm bound; 0 disables clipping.
    pub max_grad_norm: f64,
    pub ent_coef: f64,
    pub log_std_init: f64,
    /// First epoch of the second curriculum stage (Comb2 only).
    pub curriculum_boundary: usize,
    /// Multiplier applied to rewards before advantage estimation.
    pub reward_scale: f64,
    /// Stop once an evaluation reaches this reach rate.
    pub target_reach_rate: Option<f64>,
    pub network: NetworkConfig,
    pub env: EnvConfig,
    /// Explicit scenario; overrides `env.scenario` when present.
    pub scenario_spec: Option<ScenarioSpec>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schema: CONFIG_SCHEMA,
            seed: 0,
            lr_policy: 3e-4,
            lr_value: 1e-3,
            gamma: 0.99,
            steps_per_epoch: 2000,
            clip_ratio: 0.2,
            gae_lambda: 0.95,
            epochs: 800,
            n_parallel_envs: 4,
            update_epochs: 10,
            minibatch_size: 256,
            eval_every: 20,
            eval_episodes: 20,
            max_grad_norm: 0.5,
            ent_coef: 0.0,
            log_std_init: -0.5,
            curriculum_boundary: 200,
            reward_scale: 1.0,
            target_reach_rate: None,
            network: NetworkConfig::default(),
            env: EnvConfig::default(),
            scenario_spec: None,
        }
    }
}

/// Where episodes come from: one spec, or a two-family mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Single(ScenarioSpec),
    Mix(Comb),
}

impl ScenarioSource {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "comb1" => Self::Mix(Comb::Comb1),
            "comb2" => Self::Mix(Comb::Comb2),
            other => Self::Single(ScenarioSpec::preset(other)?),
        })
    }

    /// Spec for worker (or evaluation episode) `index` at `epoch`.
    pub fn spec(&self, index: usize, epoch: usize, boundary: usize) -> ScenarioSpec {
        match self {
            Self::Single(s) => s.clone(),
            Self::Mix(c) => {
                let mut s = c.spec_for_env(index);
                apply_curriculum(&mut s, Some(*c), epoch, boundary);
                s
            }
        }
    }

    pub fn comb(&self) -> Option<Comb> {
        match self {
            Self::Mix(c) => Some(*c),
            Self::Single(_) => None,
        }
    }
}

impl TrainConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {CONFIG_SCHEMA})",
                self.schema
            )));
        }
        self.env.validate()?;
        let checks = [
            (self.steps_per_epoch > 0, "steps_per_epoch must be > 0"),
            (self.n_parallel_envs > 0, "n_parallel_envs must be > 0"),
            (self.minibatch_size > 0, "minibatch_size must be > 0"),
            (self.eval_every > 0, "eval_every must be > 0"),
            (self.lr_policy >= 0.0 && self.lr_value >= 0.0, "learning rates must be >= 0"),
            ((0.0..=1.0).contains(&self.gamma), "gamma must be in [0, 1]"),
            ((0.0..=1.0).contains(&self.gae_lambda), "gae_lambda must be in [0, 1]"),
            (self.clip_ratio > 0.0, "clip_ratio must be > 0"),
            (self.reward_scale > 0.0, "reward_scale must be > 0"),
            (self.max_grad_norm >= 0.0, "max_grad_norm must be >= 0"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        self.scenario()?;
        self.net_spec()?.validate()?;
        Ok(())
    }

    pub fn grad_clip(&self) -> Option<f64> {
        (self.max_grad_norm > 0.0).then_some(self.max_grad_norm)
    }

    pub fn scenario(&self) -> Result<ScenarioSource> {
        match &self.scenario_spec {
            Some(s) => Ok(ScenarioSource::Single(s.clone())),
            None => ScenarioSource::parse(&self.env.scenario),
        }
    }

    pub fn net_spec(&self) -> Result<NetSpec> {
        let encoder = lognav_core::Encoder::new(self.env.encoder, Default::default())?;
        let (h, w) = encoder.frame_shape();
        let mut spec = NetSpec::for_frames(lognav_core::encoders::FRAME_STACK, h, w);
        spec.conv_channels = self.network.conv_channels.clone();
        spec.hidden = self.network.hidden;
        Ok(spec)
    }

    /// Fingerprint of everything that fixes parameter shapes and observation
    /// semantics.
    pub fn model_hash(&self) -> Result<String> {
        let key = serde_json::json!({
            "net": self.net_spec()?,
            "encoder": self.env.encoder,
        });
        Ok(sha256_hex(&key.to_string()))
    }
}
