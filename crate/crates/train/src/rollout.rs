//! Lockstep rollout collection over parallel environments.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lognav_core::{Encoder, Env, EpisodeStatus, Observation, VelocityCommand};
use lognav_nn::action_to_command;

use crate::agent::{stack_inputs, Agent};
use crate::config::{ScenarioSource, TrainConfig};
use crate::error::{Error, Result};
use crate::gae::compute_gae;
use crate::seeds;

/// Consecutive samples of one robot within one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub indices: Vec<usize>,
    /// Value of the state after the last sample; 0 when it ended terminally.
    pub bootstrap: f64,
}

/// Flat per-sample storage for one epoch.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub obs_len: usize,
    pub maps: Vec<f32>,
    pub goals: Vec<f32>,
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Terminal (arrival or collision) flags; truncations are not terminal.
    pub dones: Vec<bool>,
    pub segments: Vec<Segment>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn push(&mut self, obs: &Observation, action: [f64; 2], log_prob: f64, value: f64) -> usize {
        obs.maps.flatten_into(&mut self.maps);
        self.goals.extend(obs.rel_goal.iter().map(|&g| g as f32));
        self.actions.extend_from_slice(&action);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.rewards.push(0.0);
        self.dones.push(false);
        self.values.len() - 1
    }

    /// Fills `advantages` and `returns` segment by segment.
    pub fn compute_advantages(&mut self, gamma: f64, lambda: f64) -> Result<()> {
        self.advantages = vec![0.0; self.len()];
        self.returns = vec![0.0; self.len()];
        for seg in &self.segments {
            let r: Vec<f64> = seg.indices.iter().map(|&i| self.rewards[i]).collect();
            let v: Vec<f64> = seg.indices.iter().map(|&i| self.values[i]).collect();
            let d: Vec<bool> = seg.indices.iter().map(|&i| self.dones[i]).collect();
            let est = compute_gae(&r, &v, &d, seg.bootstrap, gamma, lambda)?;
            for (k, &i) in seg.indices.iter().enumerate() {
                self.advantages[i] = est.advantages[k];
                self.returns[i] = est.returns[k];
            }
        }
        Ok(())
    }
}

/// Episode outcomes observed during collection (rewards unscaled).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutStats {
    pub env_steps: usize,
    pub samples: usize,
    pub robot_episodes: usize,
    pub arrived: usize,
    pub collided: usize,
    pub timeouts: usize,
    pub robot_return_sum: f64,
    /// Sum over robots, one entry per finished episode.
    pub episode_returns: Vec<f64>,
}

impl RolloutStats {
    pub fn mean_return(&self) -> Option<f64> {
        (self.robot_episodes > 0).then(|| self.robot_return_sum / self.robot_episodes as f64)
    }

    pub fn mean_episode_return(&self) -> Option<f64> {
        (!self.episode_returns.is_empty())
            .then(|| self.episode_returns.iter().sum::<f64>() / self.episode_returns.len() as f64)
    }

    pub fn arrive_rate(&self) -> Option<f64> {
        (self.robot_episodes > 0).then(|| self.arrived as f64 / self.robot_episodes as f64)
    }
}

struct Worker {
    index: usize,
    env: Env,
    obs: Vec<Option<Observation>>,
    /// Open segment (sample indices) per robot.
    open: Vec<Vec<usize>>,
    returns: Vec<f64>,
    episodes: u64,
    rng: ChaCha8Rng,
}

pub struct Collector {
    workers: Vec<Worker>,
    source: ScenarioSource,
    seed: u64,
    boundary: usize,
    reward_scale: f64,
    obs_len: usize,
}

impl Collector {
    /// `start_epoch` decorrelates action noise after a resume.
    pub fn new(cfg: &TrainConfig, start_epoch: usize) -> Result<Self> {
        let encoder = Arc::new(Encoder::new(cfg.env.encoder, Default::default())?);
        let (h, w) = encoder.frame_shape();
        let workers = (0..cfg.n_parallel_envs)
            .map(|i| Worker {
                index: i,
                env: Env::with_encoder(cfg.env.clone(), encoder.clone()),
                obs: Vec::new(),
                open: Vec::new(),
                returns: Vec::new(),
                episodes: 0,
                rng: ChaCha8Rng::seed_from_u64(seeds::derive(
                    cfg.seed,
                    seeds::ACTION_NOISE,
                    ((start_epoch as u64) << 16) | i as u64,
                )),
            })
            .collect();
        Ok(Self {
            workers,
            source: cfg.scenario()?,
            seed: cfg.seed,
            boundary: cfg.curriculum_boundary,
            reward_scale: cfg.reward_scale,
            obs_len: lognav_core::encoders::FRAME_STACK * h * w,
        })
    }

    fn reset(&mut self, w: usize, epoch: usize) -> Result<()> {
        let worker = &mut self.workers[w];
        let spec = self.source.spec(worker.index, epoch, self.boundary);
        let seed = seeds::derive(self.seed, seeds::ENV_RESET, ((worker.index as u64) << 40) | worker.episodes);
        worker.episodes += 1;
        let obs = worker
            .env
            .reset(&spec, seed)
            .map_err(|source| Error::Env { env: w, source })?;
        worker.open = vec![Vec::new(); obs.len()];
        worker.returns = vec![0.0; obs.len()];
        worker.obs = obs.into_iter().map(Some).collect();
        Ok(())
    }

    /// Collects `steps` environment steps split evenly across workers.
    pub fn collect(&mut self, agent: &mut Agent, epoch: usize, steps: usize) -> Result<(Batch, RolloutStats)> {
        let n = self.workers.len();
        let mut budget: Vec<usize> = (0..n).map(|i| steps / n + usize::from(i < steps % n)).collect();
        let mut batch = Batch {
            obs_len: self.obs_len,
            ..Default::default()
        };
        let mut stats = RolloutStats::default();
        let mut pending: Vec<(usize, Observation)> = Vec::new();
        let (mut maps, mut goals) = (Vec::new(), Vec::new());

        loop {
            for w in 0..n {
                if budget[w] > 0 && self.workers[w].env.is_done() {
                    self.reset(w, epoch)?;
                }
            }
            let active: Vec<(usize, usize)> = (0..n)
                .filter(|&w| budget[w] > 0)
                .flat_map(|w| {
                    let worker = &self.workers[w];
                    (0..worker.obs.len()).filter(move |&r| worker.obs[r].is_some()).map(move |r| (w, r))
                })
                .collect();
            if active.is_empty() {
                break;
            }
            stack_inputs(
                active.iter().map(|&(w, r)| self.workers[w].obs[r].as_ref().unwrap()),
                &mut maps,
                &mut goals,
            );
            let dists = agent.distributions(&maps, &goals);
            let values = agent.values(&maps, &goals);

            let mut cmds: Vec<Vec<VelocityCommand>> = self
                .workers
                .iter()
                .map(|wk| vec![VelocityCommand::default(); wk.obs.len()])
                .collect();
            let mut sample_of = vec![Vec::new(); n];
            for (k, &(w, r)) in active.iter().enumerate() {
                let worker = &mut self.workers[w];
                let a = dists[k].sample(&mut worker.rng);
                let logp = dists[k].log_prob(&a);
                let idx = batch.push(worker.obs[r].as_ref().unwrap(), a, logp, values[k]);
                worker.open[r].push(idx);
                cmds[w][r] = action_to_command(a);
                sample_of[w].push((r, idx));
            }

            let stepping: Vec<bool> = (0..n).map(|w| budget[w] > 0).collect();
            let outcomes: Vec<Option<Result<_>>> = self
                .workers
                .par_iter_mut()
                .zip(cmds.par_iter())
                .enumerate()
                .map(|(w, (worker, c))| {
                    stepping[w].then(|| worker.env.step(c).map_err(|source| Error::Env { env: w, source }))
                })
                .collect();

            for (w, out) in outcomes.into_iter().enumerate() {
                let Some(out) = out else { continue };
                let out = out?;
                budget[w] -= 1;
                stats.env_steps += 1;
                let worker = &mut self.workers[w];
                for &(r, idx) in &sample_of[w] {
                    let o = out[r].as_ref().expect("active robot has an outcome");
                    batch.rewards[idx] = o.reward.total * self.reward_scale;
                    worker.returns[r] += o.reward.total;
                    let seg = std::mem::take(&mut worker.open[r]);
                    match o.status {
                        EpisodeStatus::Running => {
                            worker.open[r] = seg;
                            worker.obs[r] = Some(o.observation.clone());
                        }
                        EpisodeStatus::Arrived | EpisodeStatus::Collided => {
                            batch.dones[idx] = true;
                            batch.segments.push(Segment {
                                indices: seg,
                                bootstrap: 0.0,
                            });
                            worker.obs[r] = None;
                        }
                        EpisodeStatus::Timeout => {
                            pending.push((batch.segments.len(), o.observation.clone()));
                            batch.segments.push(Segment {
                                indices: seg,
                                bootstrap: 0.0,
                            });
                            worker.obs[r] = None;
                        }
                    }
                    if o.status.is_terminal() {
                        stats.robot_episodes += 1;
                        stats.robot_return_sum += worker.returns[r];
                        match o.status {
                            EpisodeStatus::Arrived => stats.arrived += 1,
                            EpisodeStatus::Collided => stats.collided += 1,
                            _ => stats.timeouts += 1,
                        }
                    }
                }
                if worker.env.is_done() {
                    stats.episode_returns.push(worker.returns.iter().sum());
                }
            }
        }

        // Truncate open segments at the epoch boundary.
        for worker in &mut self.workers {
            for r in 0..worker.open.len() {
                if worker.open[r].is_empty() {
                    continue;
                }
                let seg = std::mem::take(&mut worker.open[r]);
                let obs = worker.obs[r].clone().expect("open segment has a live observation");
                pending.push((batch.segments.len(), obs));
                batch.segments.push(Segment {
                    indices: seg,
                    bootstrap: 0.0,
                });
            }
        }
        for chunk in pending.chunks(256) {
            stack_inputs(chunk.iter().map(|(_, o)| o), &mut maps, &mut goals);
            let v = agent.values(&maps, &goals);
            for ((s, _), v) in chunk.iter().zip(v) {
                batch.segments[*s].bootstrap = v;
            }
        }
        stats.samples = batch.len();
        Ok((batch, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> TrainConfig {
        let mut c = TrainConfig::default();
        c.env.scenario = "desk_crowd".into();
        c.env.encoder = lognav_core::EncoderKind::AngularMap;
        c.network.conv_channels = vec![4];
        c.network.hidden = 16;
        c.n_parallel_envs = 2;
        c.seed = 11;
        c
    }

    #[test]
    fn step_accounting_and_segments() {
        let cfg = tiny_cfg();
        let mut agent = Agent::new(&cfg.net_spec().unwrap(), cfg.log_std_init, 1).unwrap();
        let mut col = Collector::new(&cfg, 0).unwrap();
        let (batch, stats) = col.collect(&mut agent, 0, 301).unwrap();
        assert_eq!(stats.env_steps, 301);
        // single-robot scenario: one sample per env step
        assert_eq!(batch.len(), 301);
        let mut seen = vec![false; batch.len()];
        for seg in &batch.segments {
            assert!(!seg.indices.is_empty());
            for (k, &i) in seg.indices.iter().enumerate() {
                assert!(!seen[i]);
                seen[i] = true;
                // only the final sample of a segment may be terminal
                assert!(!batch.dones[i] || k + 1 == seg.indices.len());
            }
            if batch.dones[*seg.indices.last().unwrap()] {
                assert_eq!(seg.bootstrap, 0.0);
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(batch.maps.len(), 301 * batch.obs_len);
    }

    #[test]
    fn collection_is_deterministic() {
        let cfg = tiny_cfg();
        let run = || {
            let mut agent = Agent::new(&cfg.net_spec().unwrap(), cfg.log_std_init, 1).unwrap();
            let mut col = Collector::new(&cfg, 0).unwrap();
            let (a, _) = col.collect(&mut agent, 0, 120).unwrap();
            let (b, _) = col.collect(&mut agent, 1, 120).unwrap();
            (a.actions, a.rewards, b.actions, b.values, b.segments)
        };
        assert_eq!(run(), run());
    }
}
