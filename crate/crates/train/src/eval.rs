//! Episode runner and the Ar / Aav / Atd metrics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use lognav_core::{Encoder, EncoderKind, Env, EnvConfig, EpisodeStatus, Observation, VelocityCommand, WorldState};
use lognav_nn::action_to_command;

use crate::agent::{stack_inputs, Agent};
use crate::config::ScenarioSource;
use crate::error::{Error, Result};
use crate::seeds;
use crate::trajlog::{LogRecord, TrajectoryLog, LOG_SCHEMA};

pub const REPORT_SCHEMA: u32 = 1;

/// Episodes simulated in lockstep so inference can be batched.
const WAVE: usize = 16;

/// Produces commands for a batch of active robots.
pub trait Controller {
    fn act(&mut self, obs: &[&Observation]) -> Result<Vec<VelocityCommand>>;
}

/// Deterministic policy: the Gaussian mean, mapped to wheel commands.
pub struct GreedyPolicy<'a> {
    agent: &'a mut Agent,
    maps: Vec<f32>,
    goals: Vec<f32>,
}

impl<'a> GreedyPolicy<'a> {
    pub fn new(agent: &'a mut Agent) -> Self {
        Self {
            agent,
            maps: Vec::new(),
            goals: Vec::new(),
        }
    }
}

impl Controller for GreedyPolicy<'_> {
    fn act(&mut self, obs: &[&Observation]) -> Result<Vec<VelocityCommand>> {
        stack_inputs(obs.iter().copied(), &mut self.maps, &mut self.goals);
        let dists = self.agent.distributions(&self.maps, &self.goals);
        Ok(dists.iter().map(|d| action_to_command(d.mean)).collect())
    }
}

/// Replays the same command for every robot at every step.
pub struct ConstantController(pub VelocityCommand);

impl Controller for ConstantController {
    fn act(&mut self, obs: &[&Observation]) -> Result<Vec<VelocityCommand>> {
        Ok(vec![self.0; obs.len()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub robot: usize,
    pub status: EpisodeStatus,
    pub steps: u64,
    /// Sum of per-step displacements.
    pub path_length: f64,
    /// Sum of |ω| over the robot's steps.
    pub abs_omega_sum: f64,
    #[serde(rename = "return")]
    pub total_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub seed: u64,
    pub steps: u64,
    pub all_arrived: bool,
    pub robots: Vec<RobotRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub scenario: String,
    pub encoder: EncoderKind,
    pub seed: u64,
    pub episodes: usize,
    pub robots: usize,
    /// Per-robot arrive rate.
    pub ar: f64,
    /// Fraction of episodes where every robot arrived.
    pub ar_episode: f64,
    /// Mean |ω| over all robot steps (rad/s).
    pub aav: f64,
    /// Mean path length over arrived robots (m); `None` if none arrived.
    pub atd: Option<f64>,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    pub mean_return: f64,
    pub records: Vec<EpisodeRecord>,
}

impl EvalReport {
    /// Aggregates per-episode records (sorted by episode index first).
    pub fn from_records(scenario: &str, encoder: EncoderKind, seed: u64, mut records: Vec<EpisodeRecord>) -> Self {
        records.sort_by_key(|r| r.episode);
        let robots: Vec<&RobotRecord> = records.iter().flat_map(|e| &e.robots).collect();
        let n = robots.len();
        let frac = |s: EpisodeStatus| {
            if n == 0 {
                0.0
            } else {
                robots.iter().filter(|r| r.status == s).count() as f64 / n as f64
            }
        };
        let steps: u64 = robots.iter().map(|r| r.steps).sum();
        let arrived: Vec<f64> = robots
            .iter()
            .filter(|r| r.status == EpisodeStatus::Arrived)
            .map(|r| r.path_length)
            .collect();
        Self {
            schema: REPORT_SCHEMA,
            scenario: scenario.to_string(),
            encoder,
            seed,
            episodes: records.len(),
            robots: n,
            ar: frac(EpisodeStatus::Arrived),
            ar_episode: if records.is_empty() {
                0.0
            } else {
                records.iter().filter(|e| e.all_arrived).count() as f64 / records.len() as f64
            },
            aav: if steps == 0 {
                0.0
            } else {
                robots.iter().map(|r| r.abs_omega_sum).sum::<f64>() / steps as f64
            },
            atd: (!arrived.is_empty()).then(|| arrived.iter().sum::<f64>() / arrived.len() as f64),
            collision_rate: frac(EpisodeStatus::Collided),
            timeout_rate: frac(EpisodeStatus::Timeout),
            mean_return: if n == 0 {
                0.0
            } else {
                robots.iter().map(|r| r.total_reward).sum::<f64>() / n as f64
            },
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Rebuilds per-episode records from a trajectory log.
pub fn records_from_log(log: &TrajectoryLog) -> Result<Vec<EpisodeRecord>> {
    let mut out: Vec<EpisodeRecord> = Vec::new();
    let mut last_pose = Vec::new();
    for r in &log.records {
        match r {
            LogRecord::Header { .. } => {}
            LogRecord::Episode { episode, seed, world } => {
                last_pose = world.robots.iter().map(|r| r.pose).collect();
                out.push(EpisodeRecord {
                    episode: *episode,
                    seed: *seed,
                    steps: 0,
                    all_arrived: false,
                    robots: (0..world.robots.len())
                        .map(|i| RobotRecord {
                            robot: i,
                            status: EpisodeStatus::Running,
                            steps: 0,
                            path_length: 0.0,
                            abs_omega_sum: 0.0,
                            total_reward: 0.0,
                        })
                        .collect(),
                });
            }
            LogRecord::Step {
                episode,
                step,
                robot,
                pose,
                command,
                reward,
                status,
            } => {
                let ep = out
                    .last_mut()
                    .filter(|e| e.episode == *episode)
                    .ok_or_else(|| Error::Config(format!("step record before episode {episode} header")))?;
                let rec = ep
                    .robots
                    .get_mut(*robot)
                    .ok_or_else(|| Error::Config(format!("unknown robot {robot}")))?;
                rec.steps += 1;
                rec.path_length += pose.position().distance(last_pose[*robot].position());
                rec.abs_omega_sum += command.omega().abs();
                rec.total_reward += reward;
                rec.status = *status;
                last_pose[*robot] = *pose;
                ep.steps = ep.steps.max(*step);
            }
        }
    }
    for ep in &mut out {
        ep.all_arrived = ep.robots.iter().all(|r| r.status == EpisodeStatus::Arrived);
    }
    Ok(out)
}

/// One evaluation episode to run: index, seed and initial world.
#[derive(Debug, Clone)]
pub struct EpisodeSetup {
    pub episode: usize,
    pub seed: u64,
    pub world: WorldState,
}

/// Generates the worlds for `n` evaluation episodes.
pub fn eval_setups(source: &ScenarioSource, n: usize, seed: u64, epoch: usize, boundary: usize) -> Result<Vec<EpisodeSetup>> {
    (0..n)
        .map(|i| {
            let s = seeds::derive(seed, seeds::EVAL, i as u64);
            let world = source.spec(i, epoch, boundary).generate(s)?;
            Ok(EpisodeSetup {
                episode: i,
                seed: s,
                world,
            })
        })
        .collect()
}

/// Runs every episode to termination. Episodes advance in lockstep waves;
/// results and log records come out in episode order.
pub fn run_episodes(
    env_cfg: &EnvConfig,
    setups: Vec<EpisodeSetup>,
    controller: &mut dyn Controller,
    mut log: Option<&mut TrajectoryLog>,
) -> Result<Vec<EpisodeRecord>> {
    let encoder = Arc::new(Encoder::new(env_cfg.encoder, Default::default())?);
    let mut records = Vec::new();
    let mut setups = setups.into_iter().peekable();
    while setups.peek().is_some() {
        let wave: Vec<EpisodeSetup> = setups.by_ref().take(WAVE).collect();
        let mut envs = Vec::new();
        let mut obs: Vec<Vec<Option<Observation>>> = Vec::new();
        let mut recs = Vec::new();
        let mut logs: Vec<Vec<LogRecord>> = Vec::new();
        for setup in &wave {
            let mut env = Env::with_encoder(env_cfg.clone(), encoder.clone());
            let mut world = setup.world.clone();
            world.dt = env_cfg.dt;
            let o = env.reset_with_world(world)?;
            let world = env.world().expect("reset").clone();
            logs.push(vec![LogRecord::Episode {
                episode: setup.episode,
                seed: setup.seed,
                world,
            }]);
            recs.push(EpisodeRecord {
                episode: setup.episode,
                seed: setup.seed,
                steps: 0,
                all_arrived: false,
                robots: (0..o.len())
                    .map(|i| RobotRecord {
                        robot: i,
                        status: EpisodeStatus::Running,
                        steps: 0,
                        path_length: 0.0,
                        abs_omega_sum: 0.0,
                        total_reward: 0.0,
                    })
                    .collect(),
            });
            obs.push(o.into_iter().map(Some).collect());
            envs.push(env);
        }
        loop {
            let active: Vec<(usize, usize)> = (0..envs.len())
                .filter(|&e| !envs[e].is_done())
                .flat_map(|e| (0..obs[e].len()).map(move |r| (e, r)))
                .filter(|&(e, r)| obs[e][r].is_some())
                .collect();
            if active.is_empty() {
                break;
            }
            let batch: Vec<&Observation> = active.iter().map(|&(e, r)| obs[e][r].as_ref().unwrap()).collect();
            let cmds = controller.act(&batch)?;
            if cmds.len() != batch.len() {
                return Err(Error::Usage("controller returned wrong number of commands".into()));
            }
            let mut per_env: Vec<Vec<VelocityCommand>> =
                envs.iter().map(|e| vec![VelocityCommand::default(); e.world().map_or(0, |w| w.robots.len())]).collect();
            for (&(e, r), &c) in active.iter().zip(&cmds) {
                per_env[e][r] = c;
            }
            for e in 0..envs.len() {
                if envs[e].is_done() {
                    continue;
                }
                let before: Vec<_> = envs[e].world().unwrap().robots.iter().map(|r| r.pose).collect();
                let outcomes = envs[e].step(&per_env[e]).map_err(|source| Error::Env { env: e, source })?;
                let step = envs[e].world().unwrap().step_index;
                recs[e].steps = step;
                for (r, out) in outcomes.into_iter().enumerate() {
                    let Some(out) = out else { continue };
                    let pose = envs[e].world().unwrap().robots[r].pose;
                    let cmd = per_env[e][r];
                    let rec = &mut recs[e].robots[r];
                    rec.steps += 1;
                    rec.path_length += pose.position().distance(before[r].position());
                    rec.abs_omega_sum += cmd.omega().abs();
                    rec.total_reward += out.reward.total;
                    rec.status = out.status;
                    logs[e].push(LogRecord::Step {
                        episode: recs[e].episode,
                        step,
                        robot: r,
                        pose,
                        command: cmd,
                        reward: out.reward.total,
                        status: out.status,
                    });
                    obs[e][r] = if out.status.is_terminal() { None } else { Some(out.observation) };
                }
            }
        }
        for (mut rec, l) in recs.into_iter().zip(logs) {
            rec.all_arrived = rec.robots.iter().all(|r| r.status == EpisodeStatus::Arrived);
            records.push(rec);
            if let Some(log) = log.as_deref_mut() {
                log.records.extend(l);
            }
        }
    }
    Ok(records)
}

/// Greedy evaluation of `agent` on `n_episodes` seeded episodes.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    agent: &mut Agent,
    env_cfg: &EnvConfig,
    scenario: &str,
    source: &ScenarioSource,
    n_episodes: usize,
    seed: u64,
    epoch: usize,
    boundary: usize,
    log: Option<&mut TrajectoryLog>,
) -> Result<EvalReport> {
    let setups = eval_setups(source, n_episodes, seed, epoch, boundary)?;
    let mut log = log;
    if let Some(l) = log.as_mut() {
        l.records.push(LogRecord::Header {
            schema: LOG_SCHEMA,
            scenario: scenario.to_string(),
            encoder: env_cfg.encoder,
        });
    }
    let records = run_episodes(env_cfg, setups, &mut GreedyPolicy::new(agent), log)?;
    Ok(EvalReport::from_records(scenario, env_cfg.encoder, seed, records))
}
