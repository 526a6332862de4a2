//! Actor–critic pair plus (de)serialisation to checkpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};

use lognav_core::{EnvConfig, Observation};
use lognav_nn::checkpoint::Checkpoint;
use lognav_nn::{Adam, ActionDistribution, Cache, NetSpec, PolicyNet, ValueNet};

use crate::config::TrainConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_KIND: &str = "lognav-policy";

/// Flattens observations into network input buffers.
pub fn stack_inputs<'a>(obs: impl IntoIterator<Item = &'a Observation>, maps: &mut Vec<f32>, goals: &mut Vec<f32>) {
    maps.clear();
    goals.clear();
    for o in obs {
        o.maps.flatten_into(maps);
        goals.extend(o.rel_goal.iter().map(|&g| g as f32));
    }
}

pub struct Agent {
    pub spec: NetSpec,
    pub policy: PolicyNet<f32>,
    pub value: ValueNet<f32>,
    policy_cache: Cache<f32>,
    value_cache: Cache<f32>,
}

impl Clone for Agent {
    fn clone(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            policy: self.policy.clone(),
            value: self.value.clone(),
            policy_cache: Cache::default(),
            value_cache: Cache::default(),
        }
    }
}

impl Agent {
    pub fn new(spec: &NetSpec, log_std_init: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            spec: spec.clone(),
            policy: PolicyNet::new(spec, log_std_init, seed)?,
            value: ValueNet::new(spec, seed ^ 0x5eed_0fa1)?,
            policy_cache: Cache::default(),
            value_cache: Cache::default(),
        })
    }

    pub fn distributions(&mut self, maps: &[f32], goals: &[f32]) -> Vec<ActionDistribution> {
        let n = goals.len() / self.spec.goal_dim;
        self.policy.distributions(maps, goals, n, &mut self.policy_cache)
    }

    pub fn values(&mut self, maps: &[f32], goals: &[f32]) -> Vec<f64> {
        let n = goals.len() / self.spec.goal_dim;
        self.value.values(maps, goals, n, &mut self.value_cache)
    }
}

/// Everything needed to rebuild an agent and its environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub schema: u32,
    pub kind: String,
    pub model_hash: String,
    pub net: NetSpec,
    pub env: EnvConfig,
    pub train: TrainConfig,
    /// Number of completed epochs.
    pub epoch: usize,
    pub reach_rate: Option<f64>,
    pub best_reach_rate: Option<f64>,
    pub adam_steps: (u64, u64),
}

pub struct LoadedCheckpoint {
    pub meta: CheckpointMeta,
    pub agent: Agent,
    pub adam: Option<(Adam, Adam)>,
}

pub fn save_checkpoint(path: &Path, meta: &CheckpointMeta, agent: &Agent, adam: Option<(&Adam, &Adam)>) -> Result<()> {
    let mut ckpt = Checkpoint {
        metadata: serde_json::to_string(meta)?,
        tensors: Vec::new(),
    };
    ckpt.push_group("policy", agent.policy.params.export());
    ckpt.push_group("value", agent.value.params.export());
    if let Some((p, v)) = adam {
        for (name, opt) in [("adam_policy", p), ("adam_value", v)] {
            ckpt.push_group(
                name,
                vec![
                    ("m".into(), vec![opt.m.len()], opt.m.clone()),
                    ("v".into(), vec![opt.v.len()], opt.v.clone()),
                ],
            );
        }
    }
    ckpt.save(path).map_err(|e| match e {
        lognav_nn::Error::Io(source) => Error::Io {
            path: path.display().to_string(),
            source,
        },
        other => other.into(),
    })
}

pub fn load_checkpoint(path: &Path) -> Result<LoadedCheckpoint> {
    let ckpt = Checkpoint::load(path).map_err(|e| match e {
        lognav_nn::Error::Io(source) => Error::Io {
            path: path.display().to_string(),
            source,
        },
        other => other.into(),
    })?;
    let meta: CheckpointMeta = serde_json::from_str(&ckpt.metadata)?;
    if meta.kind != CHECKPOINT_KIND || meta.schema != crate::config::CONFIG_SCHEMA {
        return Err(lognav_nn::Error::Incompatible(format!("{} schema {}", meta.kind, meta.schema)).into());
    }
    if meta.train.model_hash()? != meta.model_hash || meta.train.net_spec()? != meta.net {
        return Err(lognav_nn::Error::Incompatible("model hash does not match stored configuration".into()).into());
    }
    let mut agent = Agent::new(&meta.net, meta.train.log_std_init, 0)?;
    agent.policy.params.load_from(&ckpt.group("policy"))?;
    agent.value.params.load_from(&ckpt.group("value"))?;
    let adam = match (ckpt.group("adam_policy"), ckpt.group("adam_value")) {
        (p, v) if p.len() == 2 && v.len() == 2 => {
            let mut ap = Adam::new(agent.policy.params.len(), meta.train.lr_policy);
            let mut av = Adam::new(agent.value.params.len(), meta.train.lr_value);
            for (opt, group, t) in [(&mut ap, p, meta.adam_steps.0), (&mut av, v, meta.adam_steps.1)] {
                let (m, v) = (&group[0].2, &group[1].2);
                if m.len() != opt.m.len() || v.len() != opt.v.len() {
                    return Err(lognav_nn::Error::Incompatible("optimizer state size".into()).into());
                }
                opt.m = m.clone();
                opt.v = v.clone();
                opt.t = t;
            }
            Some((ap, av))
        }
        _ => None,
    };
    Ok(LoadedCheckpoint { meta, agent, adam })
}
