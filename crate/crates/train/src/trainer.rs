//! Epoch loop: collect → GAE → update, with periodic greedy evaluation and
//! best/latest checkpoints.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use lognav_core::scenarios::curriculum_goal_range;
use lognav_nn::Adam;

use crate::agent::{load_checkpoint, save_checkpoint, Agent, CheckpointMeta, CHECKPOINT_KIND};
use crate::config::{ScenarioSource, TrainConfig, CONFIG_SCHEMA};
use crate::error::{io_err, Result};
use crate::eval::{evaluate, EvalReport};
use crate::ppo::{ppo_update, UpdateStats};
use crate::rollout::Collector;
use crate::seeds;

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const BEST_CHECKPOINT: &str = "best.ckpt";
pub const LATEST_CHECKPOINT: &str = "latest.ckpt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub ar: f64,
    pub ar_episode: f64,
    pub aav: f64,
    pub atd: Option<f64>,
    pub collision_rate: f64,
    pub timeout_rate: f64,
}

impl From<&EvalReport> for EvalSummary {
    fn from(r: &EvalReport) -> Self {
        Self {
            ar: r.ar,
            ar_episode: r.ar_episode,
            aav: r.aav,
            atd: r.atd,
            collision_rate: r.collision_rate,
            timeout_rate: r.timeout_rate,
        }
    }
}

/// One line of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub env_steps: usize,
    pub samples: usize,
    pub curriculum_stage: Option<u32>,
    pub robot_episodes: usize,
    pub train_arrive_rate: Option<f64>,
    /// Mean undiscounted return per finished robot episode.
    pub mean_return: Option<f64>,
    /// Mean summed return per finished episode.
    pub mean_episode_return: Option<f64>,
    #[serde(flatten)]
    pub update: UpdateStats,
    pub reach_rate: Option<f64>,
    pub eval: Option<EvalSummary>,
    pub new_best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs_completed: usize,
    pub evaluations: Vec<(usize, f64)>,
    pub best_reach_rate: Option<f64>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

pub struct Trainer {
    pub cfg: TrainConfig,
    pub agent: Agent,
    pub adam_policy: Adam,
    pub adam_value: Adam,
    collector: Collector,
    source: ScenarioSource,
    /// Completed epochs.
    pub epoch: usize,
    pub best_reach_rate: Option<f64>,
    best_epoch: Option<usize>,
    evaluations: Vec<(usize, f64)>,
    out_dir: PathBuf,
    metrics: File,
}

impl Trainer {
    /// Fresh run; truncates any existing metrics log in `out_dir`.
    pub fn new(cfg: TrainConfig, out_dir: &Path) -> Result<Self> {
        cfg.validate()?;
        let agent = Agent::new(&cfg.net_spec()?, cfg.log_std_init, seeds::derive(cfg.seed, seeds::INIT, 0))?;
        let adam_policy = Adam::new(agent.policy.params.len(), cfg.lr_policy);
        let adam_value = Adam::new(agent.value.params.len(), cfg.lr_value);
        Self::assemble(cfg, agent, adam_policy, adam_value, 0, None, out_dir, false)
    }

    /// Continues from a checkpoint, appending to the metrics log.
    pub fn resume(cfg: TrainConfig, ckpt: &Path, out_dir: &Path) -> Result<Self> {
        cfg.validate()?;
        let loaded = load_checkpoint(ckpt)?;
        if loaded.meta.model_hash != cfg.model_hash()? {
            return Err(lognav_nn::Error::Incompatible("checkpoint was trained with a different model configuration".into()).into());
        }
        let (mut ap, mut av) = loaded.adam.unwrap_or_else(|| {
            (
                Adam::new(loaded.agent.policy.params.len(), cfg.lr_policy),
                Adam::new(loaded.agent.value.params.len(), cfg.lr_value),
            )
        });
        ap.lr = cfg.lr_policy;
        av.lr = cfg.lr_value;
        let epoch = loaded.meta.epoch;
        let best = loaded.meta.best_reach_rate;
        Self::assemble(cfg, loaded.agent, ap, av, epoch, best, out_dir, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        cfg: TrainConfig,
        agent: Agent,
        adam_policy: Adam,
        adam_value: Adam,
        epoch: usize,
        best_reach_rate: Option<f64>,
        out_dir: &Path,
        append: bool,
    ) -> Result<Self> {
        std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
        let path = out_dir.join(METRICS_FILE);
        let metrics = OpenOptions::new()
            .create(true)
            .write(true)
            .append(append)
            .truncate(!append)
            .open(&path)
            .map_err(io_err(&path))?;
        Ok(Self {
            collector: Collector::new(&cfg, epoch)?,
            source: cfg.scenario()?,
            cfg,
            agent,
            adam_policy,
            adam_value,
            epoch,
            best_reach_rate,
            best_epoch: None,
            evaluations: Vec::new(),
            out_dir: out_dir.to_path_buf(),
            metrics,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    fn scenario_name(&self) -> String {
        if self.cfg.scenario_spec.is_some() {
            "custom".into()
        } else {
            self.cfg.env.scenario.clone()
        }
    }

    fn meta(&self, reach_rate: Option<f64>) -> Result<CheckpointMeta> {
        Ok(CheckpointMeta {
            schema: CONFIG_SCHEMA,
            kind: CHECKPOINT_KIND.into(),
            model_hash: self.cfg.model_hash()?,
            net: self.agent.spec.clone(),
            env: self.cfg.env.clone(),
            train: self.cfg.clone(),
            epoch: self.epoch,
            reach_rate,
            best_reach_rate: self.best_reach_rate,
            adam_steps: (self.adam_policy.t, self.adam_value.t),
        })
    }

    pub fn save(&self, name: &str, reach_rate: Option<f64>) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        save_checkpoint(&path, &self.meta(reach_rate)?, &self.agent, Some((&self.adam_policy, &self.adam_value)))?;
        Ok(path)
    }

    /// Greedy evaluation with the configured episode count.
    pub fn evaluate(&mut self) -> Result<EvalReport> {
        let name = self.scenario_name();
        evaluate(
            &mut self.agent,
            &self.cfg.env,
            &name,
            &self.source,
            self.cfg.eval_episodes,
            self.cfg.seed,
            self.epoch,
            self.cfg.curriculum_boundary,
            None,
        )
    }

    /// Runs one epoch (and an evaluation when due) and logs its metrics.
    pub fn run_epoch(&mut self) -> Result<EpochMetrics> {
        let epoch = self.epoch;
        let (mut batch, stats) = self
            .collector
            .collect(&mut self.agent, epoch, self.cfg.steps_per_epoch)?;
        batch.compute_advantages(self.cfg.gamma, self.cfg.gae_lambda)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(self.cfg.seed, seeds::SHUFFLE, epoch as u64));
        let update = ppo_update(
            &mut self.agent,
            &mut self.adam_policy,
            &mut self.adam_value,
            &batch,
            &self.cfg,
            &mut rng,
        )?;
        self.epoch += 1;

        let mut reach_rate = None;
        let mut eval = None;
        let mut new_best = false;
        if self.epoch.is_multiple_of(self.cfg.eval_every) {
            let report = self.evaluate()?;
            reach_rate = Some(report.ar);
            eval = Some(EvalSummary::from(&report));
            self.evaluations.push((self.epoch, report.ar));
            if self.best_reach_rate.is_none_or(|b| report.ar > b) {
                self.best_reach_rate = Some(report.ar);
                self.best_epoch = Some(self.epoch);
                new_best = true;
                self.save(BEST_CHECKPOINT, reach_rate)?;
            }
            self.save(LATEST_CHECKPOINT, reach_rate)?;
        }
        let m = EpochMetrics {
            epoch: self.epoch,
            env_steps: stats.env_steps,
            samples: stats.samples,
            curriculum_stage: curriculum_goal_range(self.source.comb(), epoch, self.cfg.curriculum_boundary).map(|s| s.0),
            robot_episodes: stats.robot_episodes,
            train_arrive_rate: stats.arrive_rate(),
            mean_return: stats.mean_return(),
            mean_episode_return: stats.mean_episode_return(),
            update,
            reach_rate,
            eval,
            new_best,
        };
        let path = self.out_dir.join(METRICS_FILE);
        let line = serde_json::to_string(&m)?;
        writeln!(self.metrics, "{line}").map_err(io_err(&path))?;
        self.metrics.flush().map_err(io_err(&path))?;
        Ok(m)
    }

    /// Trains until `cfg.epochs` or the target reach rate; always leaves a
    /// `latest` checkpoint behind.
    pub fn train(&mut self, mut on_epoch: impl FnMut(&EpochMetrics)) -> Result<TrainSummary> {
        let mut stopped_early = false;
        while self.epoch < self.cfg.epochs {
            let m = self.run_epoch()?;
            on_epoch(&m);
            if let (Some(t), Some(r)) = (self.cfg.target_reach_rate, m.reach_rate) {
                if r >= t {
                    stopped_early = true;
                    break;
                }
            }
        }
        if !self.epoch.is_multiple_of(self.cfg.eval_every) || self.epoch == 0 {
            self.save(LATEST_CHECKPOINT, None)?;
        }
        Ok(TrainSummary {
            epochs_completed: self.epoch,
            evaluations: self.evaluations.clone(),
            best_reach_rate: self.best_reach_rate,
            best_epoch: self.best_epoch,
            stopped_early,
        })
    }
}

/// Convenience wrapper used by the CLI.
pub fn train(cfg: TrainConfig, out_dir: &Path, resume: Option<&Path>) -> Result<TrainSummary> {
    let mut t = match resume {
        Some(p) => Trainer::resume(cfg, p, out_dir)?,
        None => Trainer::new(cfg, out_dir)?,
    };
    t.train(|m| {
        let ret = m.mean_return.map_or("-".to_string(), |r| format!("{r:.1}"));
        let reach = m.reach_rate.map_or(String::new(), |r| format!(" reach {r:.3}"));
        eprintln!(
            "epoch {:>4}  return {ret:>8}  pi {:+.4}  v {:.4}  kl {:.4}  clip {:.3}{reach}",
            m.epoch, m.update.policy_loss, m.update.value_loss, m.update.approx_kl, m.update.clip_fraction
        );
    })
}
