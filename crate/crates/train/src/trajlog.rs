//! Line-delimited JSON trajectory logs.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use lognav_core::{EncoderKind, EpisodeStatus, Pose2D, VelocityCommand, WorldState};

use crate::error::{io_err, Error, Result};

pub const LOG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header {
        schema: u32,
        scenario: String,
        encoder: EncoderKind,
    },
    /// Initial world of an episode.
    Episode { episode: usize, seed: u64, world: WorldState },
    /// One robot after world step `step` (1-based).
    Step {
        episode: usize,
        step: u64,
        robot: usize,
        pose: Pose2D,
        command: VelocityCommand,
        reward: f64,
        status: EpisodeStatus,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<LogRecord>,
}

impl TrajectoryLog {
    pub fn scenario(&self) -> Option<&str> {
        self.records.iter().find_map(|r| match r {
            LogRecord::Header { scenario, .. } => Some(scenario.as_str()),
            _ => None,
        })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(f);
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(io_err(path))?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(io_err(path))?;
        let mut records = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        let log = Self { records };
        match log.records.first() {
            Some(LogRecord::Header { schema, .. }) if *schema == LOG_SCHEMA => Ok(log),
            Some(LogRecord::Header { schema, .. }) => Err(Error::Config(format!("unsupported log schema {schema}"))),
            _ => Err(Error::Config(format!("{} has no log header", path.display()))),
        }
    }

    /// Initial world and per-robot pose sequences (start pose first) of one
    /// episode.
    pub fn episode_paths(&self, episode: usize) -> Option<(WorldState, Vec<Vec<Pose2D>>)> {
        let world = self.records.iter().find_map(|r| match r {
            LogRecord::Episode { episode: e, world, .. } if *e == episode => Some(world.clone()),
            _ => None,
        })?;
        let mut paths: Vec<Vec<Pose2D>> = world.robots.iter().map(|r| vec![r.pose]).collect();
        for r in &self.records {
            if let LogRecord::Step {
                episode: e, robot, pose, ..
            } = r
            {
                if *e == episode && *robot < paths.len() {
                    paths[*robot].push(*pose);
                }
            }
        }
        Some((world, paths))
    }
}
